"""RDF terms (IRIs, blank nodes, literals) and the total ordering over them.

Ordering is used for deterministic serialization: IRIs sort before blank
nodes, blank nodes before literals, and each kind sorts lexicographically
within itself.
"""

from __future__ import annotations

import datetime as _dt
import re
from dataclasses import dataclass, field
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

XSD = "http://www.w3.org/2001/XMLSchema#"
RDF = "http://www.w3.org/1999/02/22-rdf-syntax-ns#"
RDFS = "http://www.w3.org/2000/01/rdf-schema#"
WGS84 = "http://www.w3.org/2003/01/geo/wgs84_pos#"

XSD_STRING = XSD + "string"
XSD_DECIMAL = XSD + "decimal"
XSD_INTEGER = XSD + "integer"
XSD_DOUBLE = XSD + "double"
XSD_DATE = XSD + "date"

RDF_TYPE = RDF + "type"
RDF_LANGSTRING = RDF + "langString"
RDF_PROPERTY = RDF + "Property"
RDFS_CLASS = RDFS + "Class"
RDFS_LABEL = RDFS + "label"
RDFS_DOMAIN = RDFS + "domain"
RDFS_RANGE = RDFS + "range"
WGS84_LAT = WGS84 + "lat"
WGS84_LONG = WGS84 + "long"

NUMERIC_DATATYPES = frozenset({XSD_INTEGER, XSD_DECIMAL, XSD_DOUBLE})


class TermError(ValueError):
    """A term or triple violates the data model invariants."""


_SCHEME_RE = re.compile(r"^[A-Za-z][A-Za-z0-9+.\-]*:")
_DECIMAL_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)$")
_DOUBLE_RE = re.compile(r"^[+-]?(\d+\.?\d*|\.\d+)([eE][+-]?\d+)?$")
_DATE_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_LANG_RE = re.compile(r"^[a-z][a-z0-9]*(-[a-z0-9]+)*$")
_BNODE_LABEL_RE = re.compile(r"^[A-Za-z0-9_]+$")

# Characters that would break the angle-bracket serialization of an IRI.
_IRI_FORBIDDEN = set('<>"\\')


@dataclass(frozen=True, slots=True)
class Iri:
    """An absolute IRI."""

    value: str

    def __post_init__(self) -> None:
        v = self.value
        if not v:
            raise TermError("IRI must be non-empty")
        if not _SCHEME_RE.match(v):
            raise TermError(f"IRI missing scheme: {v!r}")
        for ch in v:
            if ch in _IRI_FORBIDDEN or ch.isspace() or ord(ch) < 0x20:
                raise TermError(f"IRI contains forbidden character {ch!r}: {v!r}")

    def __str__(self) -> str:
        return self.value


@dataclass(frozen=True, slots=True)
class BlankNode:
    label: str

    def __post_init__(self) -> None:
        if not _BNODE_LABEL_RE.match(self.label):
            raise TermError(f"invalid blank node label: {self.label!r}")

    def __str__(self) -> str:
        return "_:" + self.label


@dataclass(frozen=True, slots=True)
class Literal:
    """A literal with an explicit datatype.

    Plain strings carry xsd:string; language-tagged strings carry
    rdf:langString and a tag. Term identity is lexical: "21.3" and "21.30"
    are distinct terms even though they compare equal as numbers.
    """

    lexical: str
    datatype: Iri = field(default_factory=lambda: Iri(XSD_STRING))
    language: Optional[str] = None

    def __post_init__(self) -> None:
        dt = self.datatype.value
        if (self.language is not None) != (dt == RDF_LANGSTRING):
            raise TermError(
                "language tag is required for rdf:langString and forbidden otherwise"
            )
        if self.language is not None and not _LANG_RE.match(self.language):
            raise TermError(f"invalid language tag: {self.language!r}")
        if dt == XSD_DECIMAL and not _DECIMAL_RE.match(self.lexical):
            raise TermError(f"invalid xsd:decimal lexical form: {self.lexical!r}")
        if dt == XSD_DOUBLE and not _DOUBLE_RE.match(self.lexical):
            raise TermError(f"invalid xsd:double lexical form: {self.lexical!r}")
        if dt == XSD_DATE:
            if not _DATE_RE.match(self.lexical):
                raise TermError(f"invalid xsd:date lexical form: {self.lexical!r}")
            try:
                _dt.date(*map(int, self.lexical.split("-")))
            except ValueError:
                raise TermError(f"invalid calendar date: {self.lexical!r}") from None

    def __str__(self) -> str:
        return self.lexical


Term = Union[Iri, BlankNode, Literal]


def term_key(term: Term) -> tuple[int, str, str, str]:
    """Sort key implementing the total term ordering (IRI < bnode < literal)."""
    if isinstance(term, Iri):
        return (0, term.value, "", "")
    if isinstance(term, BlankNode):
        return (1, term.label, "", "")
    return (2, term.lexical, term.datatype.value, term.language or "")


def lang_literal(text: str, tag: str) -> Literal:
    return Literal(text, Iri(RDF_LANGSTRING), tag)


def typed_literal(lexical: str, datatype: str) -> Literal:
    return Literal(lexical, Iri(datatype))


def decimal_literal(value: Union[Decimal, int, float, str]) -> Literal:
    """Build an xsd:decimal literal, preserving the source lexical form."""
    if isinstance(value, Decimal):
        lexical = str(value)
    elif isinstance(value, (int, float)):
        lexical = str(Decimal(str(value)))
    else:
        lexical = value
    return Literal(lexical, Iri(XSD_DECIMAL))


def date_literal(value: _dt.date) -> Literal:
    return Literal(value.isoformat(), Iri(XSD_DATE))


def numeric_value(literal: Literal) -> Optional[Decimal]:
    """The numeric value of a literal, or None when it has none.

    Only xsd:integer/decimal/double lexicals participate in numeric
    comparison; anything else compares lexically or not at all.
    """
    if literal.datatype.value not in NUMERIC_DATATYPES:
        return None
    if not _DOUBLE_RE.match(literal.lexical):
        return None
    try:
        return Decimal(literal.lexical)
    except InvalidOperation:
        return None


def date_value(literal: Literal) -> Optional[_dt.date]:
    if literal.datatype.value != XSD_DATE or not _DATE_RE.match(literal.lexical):
        return None
    try:
        return _dt.date(*map(int, literal.lexical.split("-")))
    except ValueError:
        return None
