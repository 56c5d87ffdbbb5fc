"""Release gate: the seven core guarantees, one verdict line per criterion.

Each test prints "[acceptance] criterion N (...): PASS|FAIL" on the real
stdout so the verdict survives output capture.
"""

import contextlib
import datetime
import logging
import random
import string
import threading
import time
from datetime import timedelta, timezone
from pathlib import Path

from fastapi.testclient import TestClient

from climateportal.ingest import (
    IngestConfig,
    load_snapshot,
    run_ingest,
    schedule_loop,
)
from climateportal.noaa import FixtureTransport
from climateportal.rdf.graph import Graph
from climateportal.rdf.ntriples import parse_ntriples, serialize_ntriples
from climateportal.rdf.terms import RDF_TYPE, Iri
from climateportal.server import create_app
from climateportal.sparql.evaluator import evaluate
from climateportal.sparql.parser import parse_query

from randgen import random_dense_graph, random_graph
from sparql_oracle import brute_force_solutions, canon, random_query_case, select_all_ast
from turtle_reader import read_turtle

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"
BASE = "http://portal.test"
CA = BASE + "/ontology/ca#"
SCHEMA_SIZE = 17
STATION_QUERY = f"PREFIX ca: <{CA}> SELECT ?s WHERE {{ ?s a ca:Station . }}"


@contextlib.contextmanager
def criterion(capsys, number: int, name: str):
    def verdict(outcome: str) -> None:
        with capsys.disabled():
            print(f"[acceptance] criterion {number} ({name}): {outcome}", flush=True)

    try:
        yield
    except BaseException:
        verdict("FAIL")
        raise
    verdict("PASS")


def ingested_store(tmp_path: Path) -> Graph:
    store = Graph()
    config = IngestConfig(
        base_iri=BASE,
        snapshot_path=tmp_path / "snapshot.nt",
        interval=timedelta(hours=1),
    )
    report = run_ingest(config, store, FixtureTransport(FIXTURES / "standard"))
    assert report.ok
    return store


def test_criterion_1_serialization_round_trip(capsys):
    with criterion(capsys, 1, "N-Triples round-trip, 500 graphs up to 1000 triples"):
        rng = random.Random(0xC1)
        started = time.perf_counter()
        for case in range(500):
            size = rng.randint(0, 1000)
            graph = random_graph(rng, max_triples=size)
            assert parse_ntriples(serialize_ntriples(graph)) == graph
        elapsed = time.perf_counter() - started
        assert elapsed < 30.0, f"round-trip took {elapsed:.1f}s, budget is 30s"


def test_criterion_2_query_oracle_equivalence(capsys):
    with criterion(capsys, 2, "evaluator equals brute-force oracle on 1000 random cases"):
        rng = random.Random(0xC2)
        started = time.perf_counter()
        for case in range(1000):
            graph = random_dense_graph(
                rng, max_triples=rng.randint(1, 50), pool_size=rng.randint(4, 12)
            )
            patterns, filters = random_query_case(rng, graph)
            expected = set(brute_force_solutions(patterns, filters, graph))
            got = [canon(s) for s in evaluate(select_all_ast(patterns, filters), graph)]
            assert len(got) == len(set(got)), "evaluator produced duplicate solutions"
            assert set(got) == expected
        elapsed = time.perf_counter() - started
        assert elapsed < 60.0, f"oracle comparison took {elapsed:.1f}s, budget is 60s"


def test_criterion_3_ingest_arithmetic(tmp_path, capsys):
    with criterion(capsys, 3, "fixture ingest adds 58 instance triples plus schema, rerun adds 0"):
        store = Graph()
        config = IngestConfig(
            base_iri=BASE,
            snapshot_path=tmp_path / "snapshot.nt",
            interval=timedelta(hours=1),
        )
        transport = FixtureTransport(FIXTURES / "standard")
        first = run_ingest(config, store, transport)
        assert first.ok
        assert first.triples_added == 58 + SCHEMA_SIZE
        assert first.triples_duplicate == 0
        assert len(store) == 58 + SCHEMA_SIZE
        second = run_ingest(config, store, transport)
        assert second.ok
        assert second.triples_added == 0
        assert second.triples_duplicate == 58
        assert len(store) == 58 + SCHEMA_SIZE


def test_criterion_4_sparql_protocol(tmp_path, capsys):
    with criterion(capsys, 4, "SPARQL protocol GET/POST with oracle-checked bindings"):
        store = ingested_store(tmp_path)
        client = TestClient(create_app(store, BASE))

        ast = parse_query(STATION_QUERY)
        oracle_rows = brute_force_solutions(list(ast.patterns), list(ast.filters), store)

        get_response = client.get("/sparql", params={"query": STATION_QUERY})
        assert get_response.status_code == 200
        assert get_response.headers["content-type"].startswith(
            "application/sparql-results+json"
        )
        payload = get_response.json()
        assert payload["head"]["vars"] == ["s"]
        assert len(payload["results"]["bindings"]) == len(oracle_rows) == 2

        post_response = client.post(
            "/sparql",
            content=STATION_QUERY,
            headers={"content-type": "application/sparql-query"},
        )
        assert post_response.status_code == 200
        assert post_response.json() == payload

        form_response = client.post("/sparql", data={"query": STATION_QUERY})
        assert form_response.status_code == 200
        assert form_response.json() == payload

        bad = client.get("/sparql", params={"query": "SELECT ?s WHERE { ?s"})
        assert bad.status_code == 400
        assert "line" in bad.text and "column" in bad.text


def test_criterion_5_dereferencing(tmp_path, capsys):
    with criterion(capsys, 5, "every minted IRI dereferences to outbound plus inbound"):
        store = ingested_store(tmp_path)
        client = TestClient(create_app(store, BASE))
        rdf_type = Iri(RDF_TYPE)

        minted = [
            t.subject
            for t in store.match(predicate=rdf_type)
            if isinstance(t.subject, Iri)
            and t.subject.value.startswith(BASE + "/")
            and not t.subject.value.startswith(BASE + "/ontology/")
        ]
        assert len(minted) == 12  # 2 stations + 10 observations
        for subject in minted:
            path = subject.value[len(BASE):]
            response = client.get(path, headers={"accept": "text/turtle"})
            assert response.status_code == 200, path
            served = set(read_turtle(response.text))
            expected = set(store.match(subject=subject)) | set(
                store.match(object=subject)
            )
            assert served == expected, path

        assert client.get("/station/UNKNOWN").status_code == 404
        assert client.get("/obs/GHCND%3ATEST0001/1980-01-01/TMAX").status_code == 404

        station_path = "/station/GHCND%3ATEST0001"
        table = [
            ("text/turtle", "text/turtle"),
            ("text/html,application/xhtml+xml,*/*;q=0.8", "text/html"),
            ("application/json;q=0.9, text/turtle;q=1.0", "text/turtle"),
            (None, "text/turtle"),
            ("*/*", "text/turtle"),
            ("application/json", "application/json"),
            ("application/n-triples", "application/n-triples"),
        ]
        for accept, expected_type in table:
            headers = {} if accept is None else {"accept": accept}
            response = client.get(station_path, headers=headers)
            assert response.status_code == 200, accept
            assert response.headers["content-type"].startswith(expected_type), accept
        assert (
            client.get(station_path, headers={"accept": "application/pdf"}).status_code
            == 406
        )


def test_criterion_6_refresh_loop(tmp_path, caplog, capsys):
    with criterion(capsys, 6, "fake-clock loop: 4 runs, mid-run tick skipped, snapshots whole"):
        config = IngestConfig(
            base_iri=BASE,
            snapshot_path=tmp_path / "snapshot.nt",
            interval=timedelta(hours=1),
        )
        store = Graph()
        start = datetime.datetime(2021, 7, 15, tzinfo=timezone.utc)
        shutdown = threading.Event()

        class Clock:
            def __init__(self):
                self.current = start

            def now(self):
                return self.current

            def sleep(self, seconds):
                self.current = self.current + timedelta(seconds=seconds)
                if self.current >= start + timedelta(hours=3, minutes=30):
                    shutdown.set()

        clock = Clock()
        runs = []

        def probe(report):
            runs.append(report.run_started)
            snapshot = load_snapshot(config.snapshot_path)  # must parse cleanly
            assert snapshot == store

        schedule_loop(
            config,
            store,
            FixtureTransport(FIXTURES / "standard"),
            clock=clock,
            shutdown=shutdown,
            on_report=probe,
        )
        assert runs == [start + timedelta(hours=n) for n in range(4)]

        # second loop: a slowed transport makes runs outlast the interval
        class SlowTransport:
            def __init__(self, inner):
                self.inner = inner

            def send(self, endpoint, params, headers):
                slow_clock.current = slow_clock.current + timedelta(minutes=20)
                return self.inner.send(endpoint, params, headers)

        shutdown2 = threading.Event()

        class Clock2(Clock):
            def sleep(self, seconds):
                self.current = self.current + timedelta(seconds=seconds)
                if self.current >= start + timedelta(hours=2, minutes=10):
                    shutdown2.set()

        slow_clock = Clock2()
        slow_runs = []
        with caplog.at_level(logging.WARNING, logger="climateportal.ingest"):
            schedule_loop(
                config,
                Graph(),
                SlowTransport(FixtureTransport(FIXTURES / "standard")),
                clock=slow_clock,
                shutdown=shutdown2,
                on_report=lambda report: slow_runs.append(report.run_started),
            )
        assert slow_runs == [start, start + timedelta(hours=2)]
        assert any("skipped 1 tick" in r.getMessage() for r in caplog.records)


def _random_request(rng: random.Random) -> tuple[str, dict]:
    """A mix of valid, mutated, and garbage /sparql requests."""
    templates = [
        STATION_QUERY,
        f"PREFIX ca: <{CA}> SELECT ?o ?v WHERE {{ ?o ca:value ?v . }} LIMIT 5",
        "SELECT ?s ?p ?o WHERE { ?s ?p ?o . } OFFSET 3 LIMIT 7",
        f"PREFIX ca: <{CA}> SELECT DISTINCT ?d WHERE {{ ?o ca:date ?d . FILTER(?d > \"2021-06-01\"^^<http://www.w3.org/2001/XMLSchema#date>) . }} ORDER BY ?d",
    ]
    roll = rng.random()
    if roll < 0.35:
        query = rng.choice(templates)
    elif roll < 0.7:
        text = list(rng.choice(templates))
        for _ in range(rng.randint(1, 6)):
            index = rng.randrange(len(text))
            text[index] = rng.choice('{}()<>?."; abcdefghijklmnop#@%^&*')
        query = "".join(text)
    else:
        alphabet = string.printable + "é☃\U0001f327"
        query = "".join(rng.choice(alphabet) for _ in range(rng.randint(0, 80)))
    accept = rng.choice(
        [None, "application/sparql-results+json", "text/csv", "*/*", "application/pdf"]
    )
    headers = {} if accept is None else {"accept": accept}
    return query, headers


def test_criterion_7_endpoint_is_read_only(tmp_path, capsys):
    with criterion(capsys, 7, "200 fuzzed /sparql requests never mutate the store"):
        store = ingested_store(tmp_path)
        client = TestClient(create_app(store, BASE, query_timeout=2.0))
        before = serialize_ntriples(store)
        rng = random.Random(0xC7)
        for case in range(200):
            query, headers = _random_request(rng)
            if rng.random() < 0.5:
                response = client.get("/sparql", params={"query": query}, headers=headers)
            elif rng.random() < 0.5:
                response = client.post(
                    "/sparql",
                    content=query,
                    headers={"content-type": "application/sparql-query", **headers},
                )
            else:
                response = client.post("/sparql", data={"query": query}, headers=headers)
            assert response.status_code < 500, query
        assert serialize_ntriples(store) == before
