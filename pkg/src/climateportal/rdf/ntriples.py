"""N-Triples serialization and parsing.

This is the persistence format: one triple per line, lines sorted by the
global term ordering so equal graphs always serialize byte-identically.
Parsing is all-or-nothing and reports 1-based line numbers.
"""

from __future__ import annotations

import re
from typing import Optional

from climateportal.rdf.graph import Graph, Triple, triple_key
from climateportal.rdf.terms import (
    RDF_LANGSTRING,
    XSD_STRING,
    BlankNode,
    Iri,
    Literal,
    Term,
    TermError,
)


class NTriplesError(ValueError):
    """Syntax error with the 1-based line it occurred on."""

    def __init__(self, message: str, line: int, token: str = "") -> None:
        detail = f"line {line}: {message}"
        if token:
            detail += f" (at {token!r})"
        super().__init__(detail)
        self.line = line
        self.token = token


_ESCAPES = {
    "\\": "\\\\",
    '"': '\\"',
    "\n": "\\n",
    "\r": "\\r",
    "\t": "\\t",
}


def _escape_string(text: str) -> str:
    out = []
    for ch in text:
        if ch in _ESCAPES:
            out.append(_ESCAPES[ch])
        elif ord(ch) < 0x20 or ord(ch) == 0x7F:
            out.append(f"\\u{ord(ch):04X}")
        else:
            out.append(ch)
    return "".join(out)


def format_term(term: Term) -> str:
    if isinstance(term, Iri):
        return f"<{term.value}>"
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    body = f'"{_escape_string(term.lexical)}"'
    if term.language is not None:
        return f"{body}@{term.language}"
    if term.datatype.value == XSD_STRING:
        return body
    return f"{body}^^<{term.datatype.value}>"


def format_triple(triple: Triple) -> str:
    return (
        f"{format_term(triple.subject)} {format_term(triple.predicate)} "
        f"{format_term(triple.object)} ."
    )


def serialize_ntriples(graph: Graph) -> str:
    # sort triples, not formatted lines: escaping would distort the ordering
    triples = sorted(graph, key=triple_key)
    return "".join(format_triple(t) + "\n" for t in triples)


_UNESCAPES = {"\\": "\\", '"': '"', "n": "\n", "r": "\r", "t": "\t", "b": "\b", "f": "\f"}


class _LineParser:
    """Tokenizer/parser for a single N-Triples line."""

    def __init__(self, text: str, line_no: int) -> None:
        self.text = text
        self.pos = 0
        self.line_no = line_no

    def error(self, message: str) -> NTriplesError:
        token = self.text[self.pos : self.pos + 20]
        return NTriplesError(message, self.line_no, token)

    def skip_ws(self) -> None:
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        return self.pos >= len(self.text)

    def peek(self) -> str:
        return self.text[self.pos] if self.pos < len(self.text) else ""

    def parse_iri(self) -> Iri:
        end = self.text.find(">", self.pos + 1)
        if end < 0:
            raise self.error("unterminated IRI")
        raw = self.text[self.pos + 1 : end]
        self.pos = end + 1
        try:
            return Iri(raw)
        except TermError as exc:
            raise NTriplesError(str(exc), self.line_no, raw) from None

    def parse_bnode(self) -> BlankNode:
        m = re.match(r"_:([A-Za-z0-9_]+)", self.text[self.pos :])
        if not m:
            raise self.error("invalid blank node label")
        self.pos += m.end()
        return BlankNode(m.group(1))

    def parse_quoted(self) -> str:
        assert self.text[self.pos] == '"'
        self.pos += 1
        out = []
        while True:
            if self.at_end():
                raise self.error("unterminated string literal")
            ch = self.text[self.pos]
            if ch == '"':
                self.pos += 1
                return "".join(out)
            if ch == "\\":
                self.pos += 1
                if self.at_end():
                    raise self.error("dangling escape")
                esc = self.text[self.pos]
                if esc in _UNESCAPES:
                    out.append(_UNESCAPES[esc])
                    self.pos += 1
                elif esc in "uU":
                    width = 4 if esc == "u" else 8
                    hexpart = self.text[self.pos + 1 : self.pos + 1 + width]
                    if len(hexpart) != width or not re.match(r"^[0-9A-Fa-f]+$", hexpart):
                        raise self.error(f"malformed \\{esc} escape")
                    code = int(hexpart, 16)
                    if code > 0x10FFFF:
                        raise self.error("escape beyond Unicode range")
                    out.append(chr(code))
                    self.pos += 1 + width
                else:
                    raise self.error(f"unknown escape \\{esc}")
            else:
                out.append(ch)
                self.pos += 1

    def parse_literal(self) -> Literal:
        lexical = self.parse_quoted()
        if self.peek() == "@":
            m = re.match(r"@([a-zA-Z][a-zA-Z0-9]*(?:-[a-zA-Z0-9]+)*)", self.text[self.pos :])
            if not m:
                raise self.error("malformed language tag")
            self.pos += m.end()
            tag = m.group(1).lower()
            try:
                return Literal(lexical, Iri(RDF_LANGSTRING), tag)
            except TermError as exc:
                raise NTriplesError(str(exc), self.line_no) from None
        if self.text.startswith("^^", self.pos):
            self.pos += 2
            if self.peek() != "<":
                raise self.error("datatype IRI expected after ^^")
            datatype = self.parse_iri()
            try:
                return Literal(lexical, datatype)
            except TermError as exc:
                raise NTriplesError(str(exc), self.line_no) from None
        return Literal(lexical)

    def parse_subject(self) -> Term:
        ch = self.peek()
        if ch == "<":
            return self.parse_iri()
        if ch == "_":
            return self.parse_bnode()
        raise self.error("subject must be an IRI or blank node")

    def parse_predicate(self) -> Iri:
        if self.peek() != "<":
            raise self.error("predicate must be an IRI")
        return self.parse_iri()

    def parse_object(self) -> Term:
        ch = self.peek()
        if ch == "<":
            return self.parse_iri()
        if ch == "_":
            return self.parse_bnode()
        if ch == '"':
            return self.parse_literal()
        raise self.error("object must be an IRI, blank node, or literal")

    def parse_triple(self) -> Triple:
        self.skip_ws()
        subject = self.parse_subject()
        self.skip_ws()
        predicate = self.parse_predicate()
        self.skip_ws()
        obj = self.parse_object()
        self.skip_ws()
        if self.peek() != ".":
            raise self.error("expected terminating '.'")
        self.pos += 1
        self.skip_ws()
        if not self.at_end():
            raise self.error("trailing content after '.'")
        try:
            return Triple(subject, predicate, obj)  # type: ignore[arg-type]
        except TermError as exc:
            raise NTriplesError(str(exc), self.line_no) from None


def parse_ntriples(text: str) -> Graph:
    """Parse N-Triples text into a graph; duplicate lines collapse."""
    triples: list[Triple] = []
    for line_no, raw in enumerate(text.split("\n"), start=1):
        line = raw.rstrip("\r").strip()
        if not line or line.startswith("#"):
            continue
        triples.append(_LineParser(line, line_no).parse_triple())
    graph = Graph()
    for t in triples:
        graph.insert(t)
    return graph
