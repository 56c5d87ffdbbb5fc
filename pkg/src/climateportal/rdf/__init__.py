"""RDF data model: terms, triples, indexed graphs, and line-based serializations."""

from climateportal.rdf.terms import (
    BlankNode,
    Iri,
    Literal,
    Term,
    TermError,
    term_key,
)
from climateportal.rdf.graph import Graph, Triple, triple_key
from climateportal.rdf.ntriples import NTriplesError, parse_ntriples, serialize_ntriples
from climateportal.rdf.turtle import serialize_turtle

__all__ = [
    "BlankNode",
    "Graph",
    "Iri",
    "Literal",
    "NTriplesError",
    "Term",
    "TermError",
    "Triple",
    "parse_ntriples",
    "serialize_ntriples",
    "serialize_turtle",
    "term_key",
    "triple_key",
]
