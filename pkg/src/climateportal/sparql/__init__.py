"""SPARQL SELECT subset: parser, evaluator, and result serializers."""

from climateportal.sparql.ast import FilterExpr, QueryAst, Solution, TriplePattern, Variable
from climateportal.sparql.parser import (
    QueryValidationError,
    SparqlError,
    SparqlSyntaxError,
    UndeclaredPrefixError,
    parse_query,
)
from climateportal.sparql.evaluator import evaluate, evaluate_bounded
from climateportal.sparql.results import serialize_results_csv, serialize_results_json

__all__ = [
    "FilterExpr",
    "QueryAst",
    "QueryValidationError",
    "Solution",
    "SparqlError",
    "SparqlSyntaxError",
    "TriplePattern",
    "UndeclaredPrefixError",
    "Variable",
    "evaluate",
    "evaluate_bounded",
    "parse_query",
    "serialize_results_csv",
    "serialize_results_json",
]
