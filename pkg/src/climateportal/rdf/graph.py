"""In-memory triple set with subject/predicate/object indexes.

The graph has set semantics (re-inserting a triple is a no-op) and every
pattern lookup goes through `match`, which picks the most selective index
and is therefore equivalent to a full scan with the same filter.
Iteration order is insertion order, so results are deterministic for a
fixed build sequence regardless of hash randomization.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterator, Optional, Union

from climateportal.rdf.terms import (
    BlankNode,
    Iri,
    Literal,
    Term,
    TermError,
    term_key,
)

SubjectTerm = Union[Iri, BlankNode]


@dataclass(frozen=True, slots=True)
class Triple:
    subject: SubjectTerm
    predicate: Iri
    object: Term

    def __post_init__(self) -> None:
        if not isinstance(self.subject, (Iri, BlankNode)):
            raise TermError(f"triple subject must be an IRI or blank node, got {self.subject!r}")
        if not isinstance(self.predicate, Iri):
            raise TermError(f"triple predicate must be an IRI, got {self.predicate!r}")
        if not isinstance(self.object, (Iri, BlankNode, Literal)):
            raise TermError(f"triple object must be a term, got {self.object!r}")


def triple_key(triple: Triple) -> tuple:
    return (term_key(triple.subject), term_key(triple.predicate), term_key(triple.object))


class Graph:
    """A set of triples indexed by each position."""

    __slots__ = ("_triples", "_by_subject", "_by_predicate", "_by_object")

    def __init__(self, triples: Optional[Iterator[Triple]] = None) -> None:
        # dicts double as insertion-ordered sets
        self._triples: dict[Triple, None] = {}
        self._by_subject: dict[Term, dict[Triple, None]] = {}
        self._by_predicate: dict[Term, dict[Triple, None]] = {}
        self._by_object: dict[Term, dict[Triple, None]] = {}
        for t in triples or ():
            self.insert(t)

    def __len__(self) -> int:
        return len(self._triples)

    def __contains__(self, triple: Triple) -> bool:
        return triple in self._triples

    def __iter__(self) -> Iterator[Triple]:
        return iter(self._triples)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Graph):
            return NotImplemented
        return self._triples.keys() == other._triples.keys()

    def insert(self, triple: Triple) -> bool:
        """Add a triple; returns True iff it was not already present."""
        if not isinstance(triple, Triple):
            raise TermError(f"expected a Triple, got {triple!r}")
        if triple in self._triples:
            return False
        self._triples[triple] = None
        self._by_subject.setdefault(triple.subject, {})[triple] = None
        self._by_predicate.setdefault(triple.predicate, {})[triple] = None
        self._by_object.setdefault(triple.object, {})[triple] = None
        return True

    def match(
        self,
        subject: Optional[Term] = None,
        predicate: Optional[Term] = None,
        object: Optional[Term] = None,
    ) -> list[Triple]:
        """All triples matching the bound positions; None is a wildcard."""
        candidates: Optional[dict[Triple, None]] = None
        for bound, index in (
            (subject, self._by_subject),
            (predicate, self._by_predicate),
            (object, self._by_object),
        ):
            if bound is None:
                continue
            bucket = index.get(bound)
            if bucket is None:
                return []
            if candidates is None or len(bucket) < len(candidates):
                candidates = bucket
        if candidates is None:
            candidates = self._triples
        return [
            t
            for t in candidates
            if (subject is None or t.subject == subject)
            and (predicate is None or t.predicate == predicate)
            and (object is None or t.object == object)
        ]

    def terms(self) -> list[Term]:
        """Distinct terms appearing in any position, in first-seen order."""
        seen: dict[Term, None] = {}
        for t in self._triples:
            seen[t.subject] = None
            seen[t.predicate] = None
            seen[t.object] = None
        return list(seen)
