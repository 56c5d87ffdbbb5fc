"""Predesigned queries: they parse, substitute safely, and answer correctly."""

import datetime
from pathlib import Path

import pytest

from climateportal.canned import (
    CANNED_NAMES,
    CannedQueryError,
    MissingParameterError,
    UnknownCannedQueryError,
    canned_query,
)
from climateportal.ingest import IngestConfig, run_ingest
from climateportal.noaa import FixtureTransport
from climateportal.ontology import station_uri
from climateportal.rdf.graph import Graph
from climateportal.sparql.evaluator import evaluate
from climateportal.sparql.parser import parse_query

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
BASE = "http://portal.test"
ALL_PARAMS = {
    "station": "GHCND:TEST0001",
    "start": "2021-06-01",
    "end": "2021-06-30",
    "datatype": "TMAX",
    "date": "2021-06-01",
}


@pytest.fixture(scope="module")
def store(tmp_path_factory):
    graph = Graph()
    config = IngestConfig(
        base_iri=BASE,
        snapshot_path=tmp_path_factory.mktemp("canned") / "snap.nt",
        interval=datetime.timedelta(hours=1),
    )
    run_ingest(config, graph, FixtureTransport(FIXTURES / "standard"))
    return graph


def run(store, name, **params):
    text = canned_query(name, BASE, params)
    return evaluate(parse_query(text), store)


@pytest.mark.parametrize("name", CANNED_NAMES)
def test_every_canned_query_parses(name):
    parse_query(canned_query(name, BASE, ALL_PARAMS))


def test_stations_list(store):
    rows = run(store, "stations-list")
    assert len(rows) == 2
    labels = [row["label"].lexical for row in rows]
    assert labels == ["TEST STATION ONE", "TEST STATION TWO"]


def test_observations_by_station(store):
    rows = run(store, "observations-by-station", station="GHCND:TEST0001")
    assert len(rows) == 10
    dates = [row["date"].lexical for row in rows]
    assert dates == sorted(dates)


def test_observations_by_station_unknown_station(store):
    assert run(store, "observations-by-station", station="GHCND:NOPE") == []


def test_values_in_date_range_is_inclusive(store):
    rows = run(
        store,
        "values-in-date-range",
        station="GHCND:TEST0001",
        start="2021-06-02",
        end="2021-06-03",
    )
    assert len(rows) == 6
    assert {row["date"].lexical for row in rows} == {"2021-06-02", "2021-06-03"}


def test_daily_value_for_datatype(store):
    rows = run(store, "daily-value-for-datatype", datatype="TMAX", date="2021-06-01")
    assert len(rows) == 1
    assert rows[0]["station"] == station_uri(BASE, "GHCND:TEST0001")
    assert rows[0]["value"].lexical == "21.3"


def test_unknown_name_lists_available():
    with pytest.raises(UnknownCannedQueryError, match="stations-list"):
        canned_query("nope", BASE, {})


def test_missing_parameter_is_named():
    with pytest.raises(MissingParameterError, match="--station"):
        canned_query("observations-by-station", BASE, {})


def test_bad_date_rejected():
    with pytest.raises(CannedQueryError, match="YYYY-MM-DD"):
        canned_query(
            "values-in-date-range",
            BASE,
            {"station": "GHCND:X", "start": "June 1st", "end": "2021-06-30"},
        )


def test_bad_datatype_rejected():
    with pytest.raises(CannedQueryError, match="uppercase"):
        canned_query("daily-value-for-datatype", BASE, {"datatype": "tmax", "date": "2021-06-01"})


def test_station_substitution_cannot_escape_iri():
    # ">" is percent-encoded during minting, so the query stays well-formed
    text = canned_query("observations-by-station", BASE, {"station": "A>B"})
    ast = parse_query(text)
    assert any("%3E" in str(p.object) for p in ast.patterns)


def test_station_with_whitespace_rejected():
    with pytest.raises(Exception):
        canned_query("observations-by-station", BASE, {"station": "two words"})
