"""Serializers for SELECT results: SPARQL 1.1 results JSON and CSV.

The JSON layout follows the W3C results format: a "head" naming the
projected variables and a "results"/"bindings" list where each binding
maps a variable to a term object with "type" of "uri", "literal", or
"bnode". Plain strings carry no "datatype" key; language-tagged strings
carry "xml:lang".

CSV output uses RFC 4180 quoting with CRLF row endings. IRIs and blank
node labels appear bare, literals as their lexical form; unbound cells
are empty.
"""

from __future__ import annotations

import json

from climateportal.rdf.terms import XSD_STRING, BlankNode, Iri, Term
from climateportal.sparql.ast import Solution


def term_json(term: Term) -> dict[str, str]:
    if isinstance(term, Iri):
        return {"type": "uri", "value": term.value}
    if isinstance(term, BlankNode):
        return {"type": "bnode", "value": term.label}
    entry = {"type": "literal", "value": term.lexical}
    if term.language is not None:
        entry["xml:lang"] = term.language
    elif term.datatype.value != XSD_STRING:
        entry["datatype"] = term.datatype.value
    return entry


def serialize_results_json(variables: list[str], solutions: list[Solution]) -> str:
    """Render solutions as a SPARQL results JSON document."""
    bindings = []
    for solution in solutions:
        bindings.append(
            {name: term_json(solution[name]) for name in variables if name in solution}
        )
    document = {
        "head": {"vars": list(variables)},
        "results": {"bindings": bindings},
    }
    return json.dumps(document, indent=2, ensure_ascii=False)


def _csv_cell(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return "_:" + term.label
    return term.lexical


def _csv_escape(cell: str) -> str:
    if any(ch in cell for ch in (',', '"', '\r', '\n')):
        return '"' + cell.replace('"', '""') + '"'
    return cell


def serialize_results_csv(variables: list[str], solutions: list[Solution]) -> str:
    """Render solutions as RFC 4180 CSV with a header row."""
    lines = [",".join(_csv_escape(name) for name in variables)]
    for solution in solutions:
        cells = []
        for name in variables:
            term = solution.get(name)
            cells.append("" if term is None else _csv_escape(_csv_cell(term)))
        lines.append(",".join(cells))
    return "\r\n".join(lines) + "\r\n"
