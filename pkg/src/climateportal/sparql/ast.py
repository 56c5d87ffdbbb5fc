"""AST for the supported SELECT query subset.

A query is a prologue of prefix declarations, a projection, a basic graph
pattern with simple variable-vs-constant filters, and the solution
modifiers DISTINCT / ORDER BY / LIMIT / OFFSET.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Iterator, Optional, Union

from climateportal.rdf.terms import Term

FILTER_OPS = ("=", "!=", "<", "<=", ">", ">=")


@dataclass(frozen=True, slots=True)
class Variable:
    name: str  # without the "?" sigil

    def __str__(self) -> str:
        return "?" + self.name


PatternTerm = Union[Term, Variable]


@dataclass(frozen=True, slots=True)
class TriplePattern:
    subject: PatternTerm
    predicate: PatternTerm
    object: PatternTerm

    def variables(self) -> Iterator[Variable]:
        for position in (self.subject, self.predicate, self.object):
            if isinstance(position, Variable):
                yield position


@dataclass(frozen=True, slots=True)
class FilterExpr:
    variable: Variable
    op: str
    value: Term  # constant: a literal or an IRI

    def __post_init__(self) -> None:
        if self.op not in FILTER_OPS:
            raise ValueError(f"unsupported filter operator: {self.op!r}")


@dataclass(frozen=True)
class QueryAst:
    prefixes: dict[str, str] = field(default_factory=dict)
    distinct: bool = False
    projection: tuple[str, ...] = ()  # resolved even for SELECT *
    select_all: bool = False
    patterns: tuple[TriplePattern, ...] = ()
    filters: tuple[FilterExpr, ...] = ()
    order_by: Optional[tuple[str, bool]] = None  # (variable name, ascending)
    limit: Optional[int] = None
    offset: Optional[int] = None

    def pattern_variables(self) -> list[str]:
        """Variable names bound by the graph pattern, in first-use order."""
        seen: dict[str, None] = {}
        for pattern in self.patterns:
            for var in pattern.variables():
                seen[var.name] = None
        return list(seen)


# A solution row: projected variable name -> bound term. Unbound projected
# variables never appear as keys.
Solution = dict[str, Term]
