"""Deterministic Turtle serialization.

Subjects are grouped into blocks, predicates within a block are separated
by ";" (rdf:type first, rendered as "a"), and multiple objects of one
predicate by ",". IRIs compact to prefixed names only when the local part
is syntactically safe; everything else stays in angle brackets, which keeps
the output parseable by strict readers.
"""

from __future__ import annotations

import re
from typing import Mapping

from climateportal.rdf.graph import Graph, Triple, triple_key
from climateportal.rdf.ntriples import _escape_string
from climateportal.rdf.terms import (
    RDF_TYPE,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Term,
    TermError,
    term_key,
)

_PREFIX_LABEL_RE = re.compile(r"^([A-Za-z][A-Za-z0-9_\-]*)?$")
_SAFE_LOCAL_RE = re.compile(r"^[A-Za-z0-9_]([A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?$")


def _compact(iri: Iri, namespaces: list[tuple[str, str]]) -> str:
    """Prefixed form of an IRI, or its angle-bracket form when unsafe."""
    for label, ns in namespaces:
        if iri.value.startswith(ns):
            local = iri.value[len(ns) :]
            if local and _SAFE_LOCAL_RE.match(local) and ".." not in local:
                return f"{label}:{local}"
    return f"<{iri.value}>"


def _format_term(term: Term, namespaces: list[tuple[str, str]]) -> str:
    if isinstance(term, Iri):
        return _compact(term, namespaces)
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    body = f'"{_escape_string(term.lexical)}"'
    if term.language is not None:
        return f"{body}@{term.language}"
    if term.datatype.value == XSD_STRING:
        return body
    return f"{body}^^{_compact(term.datatype, namespaces)}"


def serialize_turtle(graph: Graph, prefix_map: Mapping[str, str]) -> str:
    """Serialize a graph as Turtle using the given prefix label -> namespace map."""
    for label, ns in prefix_map.items():
        if not _PREFIX_LABEL_RE.match(label):
            raise TermError(f"invalid prefix label: {label!r}")
        Iri(ns)  # namespaces must themselves be valid IRIs
    if len(graph) == 0:
        return ""

    # longest namespace wins when several prefixes share a stem
    namespaces = sorted(prefix_map.items(), key=lambda kv: (-len(kv[1]), kv[0]))

    out: list[str] = []
    for label, ns in sorted(prefix_map.items()):
        out.append(f"@prefix {label}: <{ns}> .")
    if prefix_map:
        out.append("")

    by_subject: dict[Term, list[Triple]] = {}
    for t in graph:
        by_subject.setdefault(t.subject, []).append(t)

    for subject in sorted(by_subject, key=term_key):
        triples = sorted(by_subject[subject], key=triple_key)
        by_predicate: dict[Iri, list[Term]] = {}
        for t in triples:
            by_predicate.setdefault(t.predicate, []).append(t.object)
        # rdf:type leads the block, rendered as "a"
        predicates = sorted(by_predicate, key=lambda p: (p.value != RDF_TYPE, term_key(p)))
        lines = []
        for predicate in predicates:
            pred_text = "a" if predicate.value == RDF_TYPE else _format_term(predicate, namespaces)
            objects = ", ".join(
                _format_term(o, namespaces) for o in sorted(by_predicate[predicate], key=term_key)
            )
            lines.append(f"{pred_text} {objects}")
        subject_text = _format_term(subject, namespaces)
        body = " ;\n    ".join(lines)
        out.append(f"{subject_text} {body} .")
        out.append("")

    while out and out[-1] == "":
        out.pop()
    return "\n".join(out) + "\n"
