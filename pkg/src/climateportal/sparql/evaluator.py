"""Basic graph pattern evaluation over an indexed graph.

Joins run left-to-right in written pattern order with index-backed
lookups, so the unordered result sequence is deterministic for a fixed
graph state. Modifiers apply as: filters, projection, DISTINCT, ORDER BY,
OFFSET, LIMIT.

Filter comparisons are total and never raise: numbers compare by value,
dates chronologically, otherwise same-datatype literals compare lexically;
IRIs and blank nodes support equality only; anything incomparable makes
the comparison false.
"""

from __future__ import annotations

import time
from typing import Callable, Iterator, Optional

from climateportal.rdf.graph import Graph
from climateportal.rdf.terms import (
    BlankNode,
    Iri,
    Literal,
    Term,
    date_value,
    numeric_value,
)
from climateportal.sparql.ast import FilterExpr, QueryAst, Solution, TriplePattern, Variable

_Row = dict[str, Term]


class _Truncated(Exception):
    """Internal signal that the evaluation budget ran out."""


def _match_pattern(graph: Graph, pattern: TriplePattern, row: _Row) -> Iterator[_Row]:
    """Extend one binding row with every graph triple matching the pattern."""
    positions = (pattern.subject, pattern.predicate, pattern.object)
    query = []
    for pos in positions:
        if isinstance(pos, Variable):
            query.append(row.get(pos.name))
        else:
            query.append(pos)
    for triple in graph.match(*query):
        found = (triple.subject, triple.predicate, triple.object)
        extended = dict(row)
        ok = True
        for pos, term in zip(positions, found):
            if isinstance(pos, Variable):
                bound = extended.get(pos.name)
                if bound is None:
                    extended[pos.name] = term
                elif bound != term:
                    # same variable twice in one pattern must bind consistently
                    ok = False
                    break
        if ok:
            yield extended


def compare_terms(a: Term, b: Term) -> Optional[int]:
    """-1/0/1 ordering of two terms, or None when they are incomparable."""
    if not (isinstance(a, Literal) and isinstance(b, Literal)):
        return None
    na, nb = numeric_value(a), numeric_value(b)
    if na is not None and nb is not None:
        return (na > nb) - (na < nb)
    da, db = date_value(a), date_value(b)
    if da is not None and db is not None:
        return (da > db) - (da < db)
    if a.datatype == b.datatype and a.language == b.language:
        return (a.lexical > b.lexical) - (a.lexical < b.lexical)
    return None


def filter_holds(op: str, left: Term, right: Term) -> bool:
    """Apply one comparison; mismatched kinds evaluate to false, never error."""
    if isinstance(left, (Iri, BlankNode)) or isinstance(right, (Iri, BlankNode)):
        if type(left) is not type(right):
            return False
        if op == "=":
            return left == right
        if op == "!=":
            return left != right
        return False
    order = compare_terms(left, right)
    if order is None:
        return False
    if op == "=":
        return order == 0
    if op == "!=":
        return order != 0
    if op == "<":
        return order < 0
    if op == "<=":
        return order <= 0
    if op == ">":
        return order > 0
    return order >= 0


def _passes_filters(row: _Row, filters: tuple[FilterExpr, ...]) -> bool:
    for f in filters:
        left = row.get(f.variable.name)
        if left is None or not filter_holds(f.op, left, f.value):
            return False
    return True


def _order_key(term: Term):
    """Sort key: numbers by value, then dates, then everything else by text.

    Deliberately coarse: terms with equal keys keep their pre-sort order
    (stable sort), so "1" and "1.0" tie rather than ordering by spelling.
    """
    if isinstance(term, Literal):
        n = numeric_value(term)
        if n is not None:
            return (0, n)
        d = date_value(term)
        if d is not None:
            return (1, d)
        return (2, term.lexical)
    if isinstance(term, Iri):
        return (2, term.value)
    return (2, term.label)


def _joined_rows(
    ast: QueryAst, graph: Graph, tick: Optional[Callable[[], None]]
) -> Iterator[_Row]:
    """Join all patterns left to right, applying filters.

    tick runs once per fully joined candidate row, before filtering, so a
    caller's budget check fires even when every row is filtered out.
    """

    def join(index: int, row: _Row) -> Iterator[_Row]:
        if index == len(ast.patterns):
            yield row
            return
        for extended in _match_pattern(graph, ast.patterns[index], row):
            yield from join(index + 1, extended)

    for row in join(0, {}):
        if tick is not None:
            tick()
        if _passes_filters(row, ast.filters):
            yield row


def _projected_pairs(
    ast: QueryAst, graph: Graph, tick: Optional[Callable[[], None]] = None
) -> Iterator[tuple[Solution, _Row]]:
    """(projected solution, full row) pairs, deduplicated when DISTINCT."""
    seen: set = set()
    for row in _joined_rows(ast, graph, tick):
        projected = {name: row[name] for name in ast.projection if name in row}
        if ast.distinct:
            key = tuple(sorted(projected.items(), key=lambda kv: kv[0]))
            if key in seen:
                continue
            seen.add(key)
        yield projected, row


def _apply_tail(ast: QueryAst, pairs: list[tuple[Solution, _Row]]) -> list[Solution]:
    if ast.order_by is not None:
        name, ascending = ast.order_by
        pairs.sort(
            key=lambda pair: _order_key(pair[1][name]) if name in pair[1] else (3,),
            reverse=not ascending,
        )
    start = ast.offset or 0
    end = None if ast.limit is None else start + ast.limit
    return [projected for projected, _ in pairs[start:end]]


def evaluate(ast: QueryAst, graph: Graph) -> list[Solution]:
    """All solutions of the query over the graph."""
    return _apply_tail(ast, list(_projected_pairs(ast, graph)))


def evaluate_bounded(
    ast: QueryAst,
    graph: Graph,
    max_rows: Optional[int] = None,
    timeout_seconds: Optional[float] = None,
) -> tuple[list[Solution], bool]:
    """Evaluate under a row cap and wall-clock budget.

    Returns (solutions, truncated). Truncation stops the candidate scan,
    so ordered queries sort only what was gathered before the cut. The
    clock is checked per candidate row, so filter-heavy scans that emit
    nothing still stop on time.
    """
    deadline = None if timeout_seconds is None else time.monotonic() + timeout_seconds
    counter = 0

    def tick() -> None:
        nonlocal counter
        counter += 1
        if deadline is not None and counter % 64 == 0 and time.monotonic() > deadline:
            raise _Truncated

    pairs: list[tuple[Solution, _Row]] = []
    truncated = False
    try:
        for pair in _projected_pairs(ast, graph, tick):
            if max_rows is not None and len(pairs) >= max_rows:
                truncated = True
                break
            pairs.append(pair)
    except _Truncated:
        truncated = True
    return _apply_tail(ast, pairs), truncated
