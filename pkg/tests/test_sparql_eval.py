"""Evaluator semantics: joins, filters, modifiers, and oracle equivalence."""

import random
from decimal import Decimal

import pytest

from climateportal.rdf.graph import Graph, Triple
from climateportal.rdf.terms import (
    RDFS_LABEL,
    XSD_DATE,
    XSD_DECIMAL,
    XSD_DOUBLE,
    XSD_INTEGER,
    Iri,
    Literal,
)
from climateportal.sparql.ast import FilterExpr, QueryAst, TriplePattern, Variable
from climateportal.sparql.evaluator import evaluate, evaluate_bounded, filter_holds
from climateportal.sparql.parser import parse_query

from randgen import random_dense_graph
from sparql_oracle import (
    brute_force_solutions,
    canon,
    oracle_filter_holds,
    random_query_case,
    select_all_ast,
)

CA = "http://portal.test/ontology/ca#"


def observation_graph() -> Graph:
    """One observation node with its five outbound triples."""
    obs = Iri("http://portal.test/obs/GHCND%3ATEST0001/2021-06-01/TMAX")
    station = Iri("http://portal.test/station/GHCND%3ATEST0001")
    g = Graph()
    g.insert(Triple(obs, Iri("http://www.w3.org/1999/02/22-rdf-syntax-ns#type"), Iri(CA + "Observation")))
    g.insert(Triple(obs, Iri(CA + "hasStation"), station))
    g.insert(Triple(obs, Iri(CA + "datatype"), Literal("TMAX")))
    g.insert(Triple(obs, Iri(CA + "date"), Literal("2021-06-01", Iri(XSD_DATE))))
    g.insert(Triple(obs, Iri(CA + "value"), Literal("21.3", Iri(XSD_DECIMAL))))
    return g


def station_join_graph() -> Graph:
    """Two labeled stations; ten observations all attached to the first."""
    g = Graph()
    s1 = Iri("http://portal.test/station/S1")
    s2 = Iri("http://portal.test/station/S2")
    g.insert(Triple(s1, Iri(RDFS_LABEL), Literal("Armagh")))
    g.insert(Triple(s2, Iri(RDFS_LABEL), Literal("Valentia")))
    for i in range(10):
        obs = Iri(f"http://portal.test/obs/S1/2021-06-{i + 1:02d}/TMAX")
        g.insert(Triple(obs, Iri(CA + "hasStation"), s1))
    return g


def test_any_query_over_empty_graph_is_empty():
    empty = Graph()
    rng = random.Random(7)
    for _ in range(20):
        patterns, filters = random_query_case(rng, random_dense_graph(rng, 20))
        assert evaluate(select_all_ast(patterns, filters), empty) == []


def test_single_pattern_binds_observation_value():
    ast = select_all_ast([TriplePattern(Variable("o"), Iri(CA + "value"), Variable("v"))])
    solutions = evaluate(ast, observation_graph())
    assert len(solutions) == 1
    assert solutions[0]["v"] == Literal("21.3", Iri(XSD_DECIMAL))


def test_two_pattern_join_yields_ten_solutions():
    ast = select_all_ast(
        [
            TriplePattern(Variable("o"), Iri(CA + "hasStation"), Variable("s")),
            TriplePattern(Variable("s"), Iri(RDFS_LABEL), Variable("n")),
        ]
    )
    solutions = evaluate(ast, station_join_graph())
    assert len(solutions) == 10
    assert all(sol["n"] == Literal("Armagh") for sol in solutions)


def test_repeated_variable_in_one_pattern_requires_equal_terms():
    g = Graph()
    a, b = Iri("http://x.test/a"), Iri("http://x.test/b")
    p = Iri("http://x.test/p")
    g.insert(Triple(a, p, a))
    g.insert(Triple(a, p, b))
    ast = select_all_ast([TriplePattern(Variable("x"), p, Variable("x"))])
    assert evaluate(ast, g) == [{"x": a}]


def test_constant_only_pattern_acts_as_existence_check():
    g = observation_graph()
    triple = next(iter(g))
    present = select_all_ast([TriplePattern(triple.subject, triple.predicate, triple.object)])
    absent = select_all_ast(
        [TriplePattern(triple.subject, triple.predicate, Literal("no such value"))]
    )
    assert evaluate(present, g) == [{}]
    assert evaluate(absent, g) == []


@pytest.mark.parametrize(
    "op,lexical,expected",
    [
        ("=", "21.30", True),
        ("!=", "21.30", False),
        ("<", "100", True),
        (">", "21.4", False),
        (">=", "21.3", True),
        ("<=", "21.29", False),
    ],
)
def test_numeric_filter_compares_by_value(op, lexical, expected):
    left = Literal("21.3", Iri(XSD_DECIMAL))
    right = Literal(lexical, Iri(XSD_DECIMAL))
    assert filter_holds(op, left, right) is expected


def test_filter_mixes_numeric_datatypes():
    assert filter_holds("<", Literal("5", Iri(XSD_INTEGER)), Literal("5.5", Iri(XSD_DECIMAL)))
    assert filter_holds(">", Literal("1e2", Iri(XSD_DOUBLE)), Literal("99", Iri(XSD_INTEGER)))


def test_filter_dates_chronologically():
    june = Literal("2021-06-01", Iri(XSD_DATE))
    july = Literal("2021-07-01", Iri(XSD_DATE))
    assert filter_holds("<", june, july)
    assert not filter_holds(">=", june, july)


def test_filter_incomparable_kinds_are_false_not_error():
    iri = Iri("http://x.test/a")
    num = Literal("3", Iri(XSD_INTEGER))
    plain = Literal("3")
    for op in ("=", "!=", "<", "<=", ">", ">="):
        assert filter_holds(op, iri, num) is False
        assert filter_holds(op, num, iri) is False
    # plain string vs number: different datatypes, no numeric reading of both
    assert filter_holds("=", plain, num) is False
    assert filter_holds("<", plain, num) is False
    # IRIs support equality only
    assert filter_holds("=", iri, iri) is True
    assert filter_holds("<", iri, iri) is False


def test_filter_same_datatype_strings_compare_lexically():
    assert filter_holds("<", Literal("apple"), Literal("banana"))
    assert not filter_holds("<", Literal("apple"), Literal("Apple"))


def test_unbound_filter_variable_rejects_row():
    g = observation_graph()
    ast = QueryAst(
        projection=("o",),
        patterns=(TriplePattern(Variable("o"), Iri(CA + "value"), Variable("v")),),
        filters=(FilterExpr(Variable("missing"), "=", Literal("1", Iri(XSD_INTEGER))),),
    )
    assert evaluate(ast, g) == []


def test_distinct_removes_duplicate_projections():
    g = station_join_graph()
    base = QueryAst(
        projection=("n",),
        patterns=(
            TriplePattern(Variable("o"), Iri(CA + "hasStation"), Variable("s")),
            TriplePattern(Variable("s"), Iri(RDFS_LABEL), Variable("n")),
        ),
    )
    assert len(evaluate(base, g)) == 10
    distinct = QueryAst(projection=base.projection, patterns=base.patterns, distinct=True)
    assert evaluate(distinct, g) == [{"n": Literal("Armagh")}]


def test_limit_offset_slice_the_deterministic_order():
    rng = random.Random(11)
    for _ in range(50):
        g = random_dense_graph(rng, 40)
        patterns, filters = random_query_case(rng, g)
        base_ast = select_all_ast(patterns, filters)
        base = evaluate(base_ast, g)
        k = rng.randint(0, 4)
        n = rng.randint(0, 4)
        offset_ast = QueryAst(
            projection=base_ast.projection,
            select_all=True,
            patterns=base_ast.patterns,
            filters=base_ast.filters,
            offset=k,
        )
        assert evaluate(offset_ast, g) == base[k:]
        sliced_ast = QueryAst(
            projection=base_ast.projection,
            select_all=True,
            patterns=base_ast.patterns,
            filters=base_ast.filters,
            limit=n,
            offset=k,
        )
        assert evaluate(sliced_ast, g) == base[k : k + n]


def test_order_by_numeric_then_date_then_lexical_classes():
    g = Graph()
    s = Iri("http://x.test/s")
    p = Iri("http://x.test/p")
    values = [
        Literal("10", Iri(XSD_INTEGER)),
        Literal("2.5", Iri(XSD_DECIMAL)),
        Literal("2021-01-02", Iri(XSD_DATE)),
        Literal("apple"),
        Literal("-1e1", Iri(XSD_DOUBLE)),
        Literal("2020-12-31", Iri(XSD_DATE)),
        Literal("Zebra"),
    ]
    for v in values:
        g.insert(Triple(s, p, v))
    ast = QueryAst(
        projection=("v",),
        patterns=(TriplePattern(s, p, Variable("v")),),
        order_by=("v", True),
    )
    got = [sol["v"].lexical for sol in evaluate(ast, g)]
    assert got == ["-1e1", "2.5", "10", "2020-12-31", "2021-01-02", "Zebra", "apple"]
    desc_ast = QueryAst(projection=("v",), patterns=ast.patterns, order_by=("v", False))
    assert [sol["v"].lexical for sol in evaluate(desc_ast, g)] == list(reversed(got))


def test_order_by_is_stable_for_equal_keys():
    g = Graph()
    p = Iri("http://x.test/p")
    q = Iri("http://x.test/q")
    rows = []
    for i in range(6):
        s = Iri(f"http://x.test/s{i}")
        g.insert(Triple(s, p, Literal(str(i % 2), Iri(XSD_INTEGER))))
        g.insert(Triple(s, q, Literal(f"tag{i}")))
        rows.append((i % 2, f"tag{i}"))
    ast = QueryAst(
        projection=("t",),
        patterns=(
            TriplePattern(Variable("s"), p, Variable("v")),
            TriplePattern(Variable("s"), q, Variable("t")),
        ),
        order_by=("v", True),
    )
    base_ast = QueryAst(projection=("t", "v"), patterns=ast.patterns)
    base = [(sol["v"].lexical, sol["t"].lexical) for sol in evaluate(base_ast, g)]
    expected = [t for _, t in sorted(base, key=lambda pair: Decimal(pair[0]))]
    assert [sol["t"].lexical for sol in evaluate(ast, g)] == expected


def test_order_by_ties_across_datatypes_keep_base_order():
    g = Graph()
    p = Iri("http://x.test/p")
    one_int = Literal("1", Iri(XSD_INTEGER))
    one_dec = Literal("1.0", Iri(XSD_DECIMAL))
    g.insert(Triple(Iri("http://x.test/s1"), p, one_dec))
    g.insert(Triple(Iri("http://x.test/s2"), p, one_int))
    ast = QueryAst(
        projection=("s", "v"),
        patterns=(TriplePattern(Variable("s"), p, Variable("v")),),
        order_by=("v", True),
    )
    base = QueryAst(projection=("s", "v"), patterns=ast.patterns)
    assert evaluate(ast, g) == evaluate(base, g)


def test_oracle_equivalence_quick():
    rng = random.Random(2024)
    for _ in range(250):
        g = random_dense_graph(rng, 50, pool_size=rng.randint(4, 12))
        patterns, filters = random_query_case(rng, g)
        got = [canon(sol) for sol in evaluate(select_all_ast(patterns, filters), g)]
        expected = brute_force_solutions(patterns, filters, g)
        assert len(got) == len(set(got)), "evaluator produced duplicate assignments"
        assert set(got) == set(expected)
        assert len(got) == len(expected)


def test_filter_semantics_agree_with_independent_rules():
    rng = random.Random(99)
    from randgen import random_literal, random_term

    for _ in range(3000):
        left = random_term(rng)
        right = random_literal(rng) if rng.random() < 0.7 else random_term(rng)
        for op in ("=", "!=", "<", "<=", ">", ">="):
            assert filter_holds(op, left, right) == oracle_filter_holds(op, left, right)


def test_parse_then_evaluate_composes():
    g = observation_graph()
    query = f"""
        PREFIX ca: <{CA}>
        SELECT ?v WHERE {{ ?o ca:value ?v . FILTER(?v > 20) }} LIMIT 5
    """
    solutions = evaluate(parse_query(query), g)
    assert solutions == [{"v": Literal("21.3", Iri(XSD_DECIMAL))}]
    none = evaluate(parse_query(query.replace("> 20", "> 22")), g)
    assert none == []


def test_bounded_evaluation_caps_rows():
    g = station_join_graph()
    ast = select_all_ast(
        [
            TriplePattern(Variable("o"), Iri(CA + "hasStation"), Variable("s")),
            TriplePattern(Variable("s"), Iri(RDFS_LABEL), Variable("n")),
        ]
    )
    full, truncated = evaluate_bounded(ast, g, max_rows=100)
    assert not truncated and len(full) == 10
    capped, truncated = evaluate_bounded(ast, g, max_rows=3)
    assert truncated and len(capped) == 3
    exact, truncated = evaluate_bounded(ast, g, max_rows=10)
    assert not truncated and len(exact) == 10


def test_bounded_evaluation_times_out_on_filter_heavy_scan():
    g = Graph()
    p = Iri("http://x.test/p")
    for i in range(60):
        g.insert(Triple(Iri(f"http://x.test/s{i}"), p, Literal(str(i), Iri(XSD_INTEGER))))
    ast = QueryAst(
        projection=("a", "b", "c"),
        patterns=(
            TriplePattern(Variable("a"), p, Variable("x")),
            TriplePattern(Variable("b"), p, Variable("y")),
            TriplePattern(Variable("c"), p, Variable("z")),
        ),
        filters=(FilterExpr(Variable("x"), ">", Literal("1000", Iri(XSD_INTEGER))),),
    )
    solutions, truncated = evaluate_bounded(ast, g, timeout_seconds=0.05)
    assert truncated
    assert solutions == []
