"""Predesigned queries shipped with the portal, filled in from parameters."""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from typing import Mapping

from .ontology import CaVocabulary, default_prefix_map, station_uri

_DATATYPE_RE = re.compile(r"^[A-Z0-9]+$")


class CannedQueryError(ValueError):
    pass


class UnknownCannedQueryError(CannedQueryError):
    def __init__(self, name: str) -> None:
        super().__init__(
            f"unknown canned query {name!r}; available: {', '.join(CANNED_NAMES)}"
        )


class MissingParameterError(CannedQueryError):
    def __init__(self, name: str, parameter: str) -> None:
        super().__init__(f"canned query {name!r} needs --{parameter}")
        self.parameter = parameter


@dataclass(frozen=True)
class CannedQuery:
    name: str
    description: str
    parameters: tuple[str, ...]


CANNED_QUERIES = (
    CannedQuery("stations-list", "all stations with their labels", ()),
    CannedQuery(
        "observations-by-station",
        "every observation recorded at one station",
        ("station",),
    ),
    CannedQuery(
        "values-in-date-range",
        "a station's values between two dates, inclusive",
        ("station", "start", "end"),
    ),
    CannedQuery(
        "daily-value-for-datatype",
        "one datatype's value at every station on a given day",
        ("datatype", "date"),
    ),
)
CANNED_NAMES = tuple(q.name for q in CANNED_QUERIES)


def _require(name: str, params: Mapping[str, str], parameter: str) -> str:
    value = params.get(parameter)
    if value is None or not value.strip():
        raise MissingParameterError(name, parameter)
    return value.strip()


def _checked_date(name: str, params: Mapping[str, str], parameter: str) -> str:
    value = _require(name, params, parameter)
    try:
        return datetime.date.fromisoformat(value).isoformat()
    except ValueError:
        raise CannedQueryError(f"--{parameter} must be YYYY-MM-DD, got {value!r}") from None


def _checked_datatype(name: str, params: Mapping[str, str]) -> str:
    value = _require(name, params, "datatype")
    if not _DATATYPE_RE.match(value):
        raise CannedQueryError(
            f"--datatype must be uppercase letters and digits, got {value!r}"
        )
    return value


def _prefix_header(base_iri: str) -> str:
    vocab = CaVocabulary.for_base(base_iri)
    pairs = default_prefix_map(vocab)
    return "".join(f"PREFIX {label}: <{iri}>\n" for label, iri in sorted(pairs.items()))


def canned_query(name: str, base_iri: str, params: Mapping[str, str]) -> str:
    """Render one predesigned query to SPARQL text."""
    if name not in CANNED_NAMES:
        raise UnknownCannedQueryError(name)
    header = _prefix_header(base_iri)
    if name == "stations-list":
        body = (
            "SELECT ?station ?label WHERE {\n"
            "  ?station a ca:Station .\n"
            "  ?station rdfs:label ?label .\n"
            "} ORDER BY ?station"
        )
        return header + body
    if name == "observations-by-station":
        station = station_uri(base_iri, _require(name, params, "station"))
        body = (
            "SELECT ?obs ?datatype ?date ?value WHERE {\n"
            f"  ?obs ca:hasStation <{station.value}> .\n"
            "  ?obs ca:datatype ?datatype .\n"
            "  ?obs ca:date ?date .\n"
            "  ?obs ca:value ?value .\n"
            "} ORDER BY ?date"
        )
        return header + body
    if name == "values-in-date-range":
        station = station_uri(base_iri, _require(name, params, "station"))
        start = _checked_date(name, params, "start")
        end = _checked_date(name, params, "end")
        body = (
            "SELECT ?date ?datatype ?value WHERE {\n"
            f"  ?obs ca:hasStation <{station.value}> .\n"
            "  ?obs ca:date ?date .\n"
            "  ?obs ca:datatype ?datatype .\n"
            "  ?obs ca:value ?value .\n"
            f'  FILTER(?date >= "{start}"^^xsd:date)\n'
            f'  FILTER(?date <= "{end}"^^xsd:date)\n'
            "} ORDER BY ?date"
        )
        return header + body
    datatype = _checked_datatype(name, params)
    date = _checked_date(name, params, "date")
    body = (
        "SELECT ?station ?value WHERE {\n"
        f'  ?obs ca:datatype "{datatype}" .\n'
        f'  ?obs ca:date "{date}"^^xsd:date .\n'
        "  ?obs ca:hasStation ?station .\n"
        "  ?obs ca:value ?value .\n"
        "} ORDER BY ?station"
    )
    return header + body
