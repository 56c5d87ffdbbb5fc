"""Tokenizer and recursive-descent parser for the SELECT subset.

Keywords are case-insensitive, whitespace is free-form, and every failure
is reported with a 1-based line/column position. The parser is total: any
input either yields a QueryAst or raises a SparqlError subclass.

Grammar (informally):

    PREFIX*  SELECT [DISTINCT] (?var+ | *)
    WHERE { (triple-pattern "." | FILTER(?var OP const))+ }
    [ORDER BY [ASC|DESC](?var)] [LIMIT n] [OFFSET n]
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import Optional

from climateportal.rdf.terms import (
    RDF_LANGSTRING,
    RDF_TYPE,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    Iri,
    Literal,
    Term,
    TermError,
)
from climateportal.sparql.ast import FilterExpr, QueryAst, TriplePattern, Variable


class SparqlError(ValueError):
    """Base for query errors; carries a 1-based line/column position."""

    def __init__(self, message: str, line: int, column: int) -> None:
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


class SparqlSyntaxError(SparqlError):
    pass


class UndeclaredPrefixError(SparqlError):
    def __init__(self, label: str, line: int, column: int) -> None:
        super().__init__(f"undeclared prefix {label!r}", line, column)
        self.label = label


class QueryValidationError(SparqlError):
    pass


KEYWORDS = {"select", "distinct", "where", "prefix", "filter", "order", "by", "asc", "desc", "limit", "offset"}

_TOKEN_RE = re.compile(
    r"""
    (?P<ws>\s+)
  | (?P<comment>\#[^\n]*)
  | (?P<iriref><[^<>"\s\\{}|^`]*>)
  | (?P<var>\?[A-Za-z_][A-Za-z0-9_]*)
  | (?P<string>"(?:[^"\\\n]|\\.)*")
  | (?P<langtag>@[A-Za-z][A-Za-z0-9]*(?:-[A-Za-z0-9]+)*)
  | (?P<dtmarker>\^\^)
  | (?P<number>[+-]?(?:\d+\.\d*|\.\d+|\d+)(?:[eE][+-]?\d+)?)
  | (?P<pname>(?:[A-Za-z][A-Za-z0-9_\-]*)?:(?:[A-Za-z0-9_](?:[A-Za-z0-9_\-.]*[A-Za-z0-9_\-])?)?)
  | (?P<word>[A-Za-z][A-Za-z0-9_]*)
  | (?P<op><=|>=|!=|=|<|>)
  | (?P<punct>[{}().*])
    """,
    re.VERBOSE,
)

_STRING_ESCAPES = {"t": "\t", "b": "\b", "n": "\n", "r": "\r", "f": "\f", '"': '"', "'": "'", "\\": "\\"}


@dataclass(frozen=True, slots=True)
class Token:
    kind: str
    value: str
    line: int
    column: int


def _tokenize(text: str) -> list[Token]:
    tokens: list[Token] = []
    pos = 0
    line = 1
    col = 1
    while pos < len(text):
        m = _TOKEN_RE.match(text, pos)
        if not m:
            snippet = text[pos : pos + 10].splitlines()[0] if text[pos:] else ""
            raise SparqlSyntaxError(f"unexpected character {snippet!r}", line, col)
        kind = m.lastgroup or ""
        value = m.group()
        if kind not in ("ws", "comment"):
            tokens.append(Token(kind, value, line, col))
        newlines = value.count("\n")
        if newlines:
            line += newlines
            col = len(value) - value.rfind("\n")
        else:
            col += len(value)
        pos = m.end()
    tokens.append(Token("eof", "", line, col))
    return tokens


def _unescape_string(body: str, token: Token) -> str:
    out = []
    i = 0
    while i < len(body):
        ch = body[i]
        if ch != "\\":
            out.append(ch)
            i += 1
            continue
        if i + 1 >= len(body):
            raise SparqlSyntaxError("dangling escape in string", token.line, token.column)
        esc = body[i + 1]
        if esc in _STRING_ESCAPES:
            out.append(_STRING_ESCAPES[esc])
            i += 2
        elif esc in "uU":
            width = 4 if esc == "u" else 8
            hexpart = body[i + 2 : i + 2 + width]
            if len(hexpart) != width or not re.fullmatch(r"[0-9A-Fa-f]+", hexpart):
                raise SparqlSyntaxError(f"malformed \\{esc} escape", token.line, token.column)
            code = int(hexpart, 16)
            if code > 0x10FFFF:
                raise SparqlSyntaxError("escape beyond Unicode range", token.line, token.column)
            out.append(chr(code))
            i += 2 + width
        else:
            raise SparqlSyntaxError(f"unknown escape \\{esc}", token.line, token.column)
    return "".join(out)


class _Parser:
    def __init__(self, text: str) -> None:
        self.tokens = _tokenize(text)
        self.index = 0
        self.prefixes: dict[str, str] = {}

    # --- token helpers ---

    def peek(self) -> Token:
        return self.tokens[self.index]

    def advance(self) -> Token:
        tok = self.tokens[self.index]
        if tok.kind != "eof":
            self.index += 1
        return tok

    def at_keyword(self, word: str) -> bool:
        tok = self.peek()
        return tok.kind == "word" and tok.value.lower() == word

    def expect_keyword(self, word: str) -> Token:
        tok = self.peek()
        if not self.at_keyword(word):
            raise SparqlSyntaxError(
                f"expected {word.upper()}, got {tok.value!r}", tok.line, tok.column
            )
        return self.advance()

    def expect_punct(self, value: str) -> Token:
        tok = self.peek()
        if not (tok.kind in ("punct", "op") and tok.value == value):
            raise SparqlSyntaxError(
                f"expected {value!r}, got {tok.value!r}", tok.line, tok.column
            )
        return self.advance()

    def syntax_error(self, message: str) -> SparqlSyntaxError:
        tok = self.peek()
        return SparqlSyntaxError(message + f", got {tok.value!r}", tok.line, tok.column)

    # --- term parsing ---

    def resolve_pname(self, tok: Token) -> Iri:
        label, _, local = tok.value.partition(":")
        if label not in self.prefixes:
            raise UndeclaredPrefixError(label, tok.line, tok.column)
        try:
            return Iri(self.prefixes[label] + local)
        except TermError as exc:
            raise SparqlSyntaxError(str(exc), tok.line, tok.column) from None

    def parse_iri_token(self) -> Iri:
        tok = self.peek()
        if tok.kind == "iriref":
            self.advance()
            try:
                return Iri(tok.value[1:-1])
            except TermError as exc:
                raise SparqlSyntaxError(str(exc), tok.line, tok.column) from None
        if tok.kind == "pname":
            self.advance()
            return self.resolve_pname(tok)
        raise self.syntax_error("expected an IRI")

    def parse_number(self, tok: Token) -> Literal:
        value = tok.value
        if "e" in value.lower():
            datatype = XSD_DOUBLE
        elif "." in value:
            datatype = XSD_DECIMAL
        else:
            datatype = XSD_INTEGER
        return Literal(value, Iri(datatype))

    def parse_literal(self, tok: Token) -> Literal:
        lexical = _unescape_string(tok.value[1:-1], tok)
        nxt = self.peek()
        if nxt.kind == "langtag":
            self.advance()
            tag = nxt.value[1:].lower()
            return Literal(lexical, Iri(RDF_LANGSTRING), tag)
        if nxt.kind == "dtmarker":
            self.advance()
            datatype = self.parse_iri_token()
            try:
                return Literal(lexical, datatype)
            except TermError as exc:
                raise SparqlSyntaxError(str(exc), nxt.line, nxt.column) from None
        return Literal(lexical)

    def parse_pattern_position(self, position: str):
        tok = self.peek()
        if tok.kind == "var":
            self.advance()
            return Variable(tok.value[1:])
        if tok.kind in ("iriref", "pname"):
            return self.parse_iri_token()
        if position == "predicate" and tok.kind == "word" and tok.value == "a":
            self.advance()
            return Iri(RDF_TYPE)
        if position == "object":
            if tok.kind == "string":
                self.advance()
                return self.parse_literal(tok)
            if tok.kind == "number":
                self.advance()
                return self.parse_number(tok)
            raise self.syntax_error("expected a variable, IRI, or literal")
        raise self.syntax_error(f"expected a variable or IRI in {position} position")

    def parse_constant(self) -> Term:
        tok = self.peek()
        if tok.kind in ("iriref", "pname"):
            return self.parse_iri_token()
        if tok.kind == "string":
            self.advance()
            return self.parse_literal(tok)
        if tok.kind == "number":
            self.advance()
            return self.parse_number(tok)
        raise self.syntax_error("expected a constant (literal or IRI)")

    # --- grammar productions ---

    def parse_prologue(self) -> None:
        while self.at_keyword("prefix"):
            self.advance()
            tok = self.peek()
            if tok.kind != "pname" or not tok.value.endswith(":") or ":" in tok.value[:-1]:
                raise self.syntax_error("expected prefix label ending in ':'")
            self.advance()
            label = tok.value[:-1]
            iri = self.peek()
            if iri.kind != "iriref":
                raise self.syntax_error("expected namespace IRI after prefix label")
            self.advance()
            self.prefixes[label] = iri.value[1:-1]

    def parse_projection(self) -> tuple[bool, list[Token]]:
        tok = self.peek()
        if tok.kind == "punct" and tok.value == "*":
            self.advance()
            return True, []
        variables = []
        while self.peek().kind == "var":
            variables.append(self.advance())
        if not variables:
            raise SparqlSyntaxError(
                f"projection expected: SELECT needs '*' or at least one ?variable, got {tok.value!r}",
                tok.line,
                tok.column,
            )
        return False, variables

    def parse_filter(self) -> tuple[FilterExpr, Token]:
        self.expect_keyword("filter")
        self.expect_punct("(")
        var_tok = self.peek()
        if var_tok.kind != "var":
            raise self.syntax_error("expected a ?variable in FILTER")
        self.advance()
        op_tok = self.peek()
        if op_tok.kind != "op":
            raise self.syntax_error("expected a comparison operator")
        self.advance()
        value = self.parse_constant()
        self.expect_punct(")")
        return FilterExpr(Variable(var_tok.value[1:]), op_tok.value, value), var_tok

    def parse_group(self) -> tuple[list[TriplePattern], list[tuple[FilterExpr, Token]]]:
        self.expect_punct("{")
        patterns: list[TriplePattern] = []
        filters: list[tuple[FilterExpr, Token]] = []
        while True:
            tok = self.peek()
            if tok.kind == "punct" and tok.value == "}":
                self.advance()
                break
            if tok.kind == "eof":
                raise self.syntax_error("expected '}' to close the graph pattern")
            if self.at_keyword("filter"):
                filters.append(self.parse_filter())
                continue
            subject = self.parse_pattern_position("subject")
            predicate = self.parse_pattern_position("predicate")
            obj = self.parse_pattern_position("object")
            patterns.append(TriplePattern(subject, predicate, obj))
            nxt = self.peek()
            if nxt.kind == "punct" and nxt.value == ".":
                self.advance()
            elif not (nxt.kind == "punct" and nxt.value == "}") and not self.at_keyword("filter"):
                raise self.syntax_error("expected '.' after triple pattern")
        if not patterns:
            raise self.syntax_error("graph pattern needs at least one triple pattern")
        return patterns, filters

    def parse_nonnegative_int(self, what: str) -> int:
        tok = self.peek()
        if tok.kind != "number" or not re.fullmatch(r"\d+", tok.value):
            raise self.syntax_error(f"expected a non-negative integer for {what}")
        self.advance()
        return int(tok.value)

    def parse_modifiers(
        self,
    ) -> tuple[Optional[tuple[str, bool]], Optional[Token], Optional[int], Optional[int]]:
        order_by = None
        order_tok = None
        limit = None
        offset = None
        if self.at_keyword("order"):
            self.advance()
            self.expect_keyword("by")
            ascending = True
            if self.at_keyword("asc") or self.at_keyword("desc"):
                ascending = self.advance().value.lower() == "asc"
                self.expect_punct("(")
                var_tok = self.peek()
                if var_tok.kind != "var":
                    raise self.syntax_error("expected a ?variable in ORDER BY")
                self.advance()
                self.expect_punct(")")
            else:
                var_tok = self.peek()
                if var_tok.kind != "var":
                    raise self.syntax_error("expected a ?variable in ORDER BY")
                self.advance()
            order_by = (var_tok.value[1:], ascending)
            order_tok = var_tok
        while self.at_keyword("limit") or self.at_keyword("offset"):
            word = self.advance().value.lower()
            if word == "limit":
                if limit is not None:
                    raise self.syntax_error("duplicate LIMIT")
                limit = self.parse_nonnegative_int("LIMIT")
            else:
                if offset is not None:
                    raise self.syntax_error("duplicate OFFSET")
                offset = self.parse_nonnegative_int("OFFSET")
        return order_by, order_tok, limit, offset

    def parse_query(self) -> QueryAst:
        self.parse_prologue()
        self.expect_keyword("select")
        distinct = False
        if self.at_keyword("distinct"):
            self.advance()
            distinct = True
        select_all, var_tokens = self.parse_projection()
        self.expect_keyword("where")
        patterns, filters_with_tokens = self.parse_group()
        order_by, order_tok, limit, offset = self.parse_modifiers()
        tok = self.peek()
        if tok.kind != "eof":
            raise self.syntax_error("unexpected content after query")

        pattern_vars: dict[str, None] = {}
        for pattern in patterns:
            for var in pattern.variables():
                pattern_vars[var.name] = None
        if select_all:
            projection = tuple(pattern_vars)
        else:
            seen: dict[str, None] = {}
            for var_tok in var_tokens:
                name = var_tok.value[1:]
                if name not in pattern_vars:
                    raise QueryValidationError(
                        f"variable ?{name} is projected but never used in a pattern",
                        var_tok.line,
                        var_tok.column,
                    )
                seen[name] = None
            projection = tuple(seen)
        for filter_expr, var_tok in filters_with_tokens:
            if filter_expr.variable.name not in pattern_vars:
                raise QueryValidationError(
                    f"filter variable ?{filter_expr.variable.name} does not appear in any pattern",
                    var_tok.line,
                    var_tok.column,
                )
        if order_by and order_by[0] not in pattern_vars:
            assert order_tok is not None
            raise QueryValidationError(
                f"ORDER BY variable ?{order_by[0]} does not appear in any pattern",
                order_tok.line,
                order_tok.column,
            )
        return QueryAst(
            prefixes=dict(self.prefixes),
            distinct=distinct,
            projection=projection,
            select_all=select_all,
            patterns=tuple(patterns),
            filters=tuple(f for f, _ in filters_with_tokens),
            order_by=order_by,
            limit=limit,
            offset=offset,
        )


def parse_query(text: str) -> QueryAst:
    """Parse a SELECT query; raises a positioned SparqlError on any failure."""
    if not isinstance(text, str):
        raise SparqlSyntaxError("query must be text", 1, 1)
    return _Parser(text).parse_query()
