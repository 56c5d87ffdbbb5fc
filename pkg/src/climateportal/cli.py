"""Operator command line: serve, ingest, query, export, stats, validate.

Exit statuses are a stable scripting contract: 0 success, 1 runtime
failure, 2 usage or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import os
import sys
import threading
from pathlib import Path
from typing import Optional

from .canned import CANNED_QUERIES, CannedQueryError, canned_query
from .config import ConfigError, PortalConfig, load_config
from .ingest import IngestConfig, load_snapshot, run_ingest, schedule_loop
from .noaa import (
    CdoParseError,
    CdoTransportError,
    FixtureTransport,
    LiveTransport,
    parse_cdo_payload,
)
from .ontology import CaVocabulary, default_prefix_map
from .rdf.graph import Graph
from .rdf.ntriples import NTriplesError, serialize_ntriples
from .rdf.terms import RDF_TYPE, BlankNode, Iri, Literal, Term
from .rdf.turtle import serialize_turtle
from .server import ReadWriteLock, create_app
from .sparql.evaluator import evaluate
from .sparql.parser import SparqlError, parse_query
from .sparql.results import serialize_results_csv, serialize_results_json

logger = logging.getLogger(__name__)


def _ingest_config(config: PortalConfig) -> IngestConfig:
    return IngestConfig(
        base_iri=config.base_iri,
        locations=config.locations,
        window_days=config.window_days,
        interval=config.interval,
        snapshot_path=config.snapshot_path,
        token=config.token,
    )


def _load_store(config: PortalConfig) -> Graph:
    return load_snapshot(config.snapshot_path)


def _transport(args: argparse.Namespace, config: PortalConfig):
    """Pick the ingest source; None when neither flag was given (serve only)."""
    if getattr(args, "fixtures", None):
        try:
            return FixtureTransport(args.fixtures)
        except CdoTransportError as exc:
            raise ConfigError("fixtures", str(exc)) from None
    if getattr(args, "live", False):
        if not config.token:
            raise ConfigError(
                "NOAA_TOKEN", "--live needs an API token; set the NOAA_TOKEN variable"
            )
        return LiveTransport(config.api_base, timeout=config.http_timeout)
    return None


def _parse_date_flag(name: str, value: Optional[str]):
    import datetime

    if value is None:
        return None
    try:
        return datetime.date.fromisoformat(value)
    except ValueError:
        raise ConfigError(name, f"expected YYYY-MM-DD, got {value!r}") from None


# --- serve ------------------------------------------------------------------------


def _run_server(app, host: str, port: int) -> None:
    import uvicorn

    uvicorn.run(app, host=host, port=port, log_level="warning")


def cmd_serve(args: argparse.Namespace) -> int:
    config = load_config(args.config, os.environ)
    transport = _transport(args, config)
    try:
        store = _load_store(config)
    except NTriplesError as exc:
        print(f"snapshot is corrupt: {exc}", file=sys.stderr)
        return 1
    host, port = config.host_and_port()
    lock = ReadWriteLock()
    app = create_app(
        store,
        config.base_iri,
        lock=lock,
        ui_dir=args.ui,
        query_timeout=config.query_timeout,
    )
    print(f"listening on {host}:{port}, {len(store)} triples", file=sys.stderr)

    shutdown = threading.Event()
    scheduler = None
    if transport is None:
        print(
            "no ingest source configured (--fixtures or --live); serving the"
            " snapshot as-is",
            file=sys.stderr,
        )
    else:
        state = app.state.portal

        def remember(report) -> None:
            state.last_report = report

        scheduler = threading.Thread(
            target=schedule_loop,
            args=(_ingest_config(config), store, transport),
            kwargs=dict(
                shutdown=shutdown, on_report=remember, write_lock=lock.writing
            ),
            name="ingest-scheduler",
            daemon=True,
        )
        scheduler.start()
    try:
        _run_server(app, host, port)
    except (OSError, SystemExit) as exc:
        print(f"server failed to start: {exc}", file=sys.stderr)
        return 1
    finally:
        shutdown.set()
        if scheduler is not None:
            scheduler.join(timeout=10)
    return 0


# --- ingest -----------------------------------------------------------------------


def cmd_ingest(args: argparse.Namespace) -> int:
    config = load_config(args.config, os.environ)
    transport = _transport(args, config)
    start = _parse_date_flag("start", args.start)
    end = _parse_date_flag("end", args.end)
    if (start is None) != (end is None):
        print("--start and --end must be given together", file=sys.stderr)
        return 2
    try:
        store = _load_store(config)
    except NTriplesError as exc:
        print(f"snapshot is corrupt: {exc}", file=sys.stderr)
        return 1
    report = run_ingest(
        _ingest_config(config), store, transport, start_date=start, end_date=end
    )
    if args.format == "json":
        payload = {
            "run_started": report.run_started.isoformat(),
            "stations_seen": report.stations_seen,
            "observations_seen": report.observations_seen,
            "triples_added": report.triples_added,
            "triples_duplicate": report.triples_duplicate,
            "retries": report.retries,
            "errors": list(report.errors),
            "duration": report.duration,
        }
        print(json.dumps(payload, indent=2))
    else:
        print(report.summary())
    return 0 if report.ok else 1


# --- query ------------------------------------------------------------------------


def _display(term: Term) -> str:
    if isinstance(term, Iri):
        return term.value
    if isinstance(term, BlankNode):
        return f"_:{term.label}"
    assert isinstance(term, Literal)
    if term.language:
        return f"{term.lexical}@{term.language}"
    return term.lexical


def _format_table(variables: list[str], solutions) -> str:
    header = list(variables)
    rows = [
        [_display(solution[name]) if name in solution else "" for name in header]
        for solution in solutions
    ]
    widths = [
        max(len(header[i]), *(len(row[i]) for row in rows)) if rows else len(header[i])
        for i in range(len(header))
    ]
    lines = [
        "  ".join(header[i].ljust(widths[i]) for i in range(len(header))).rstrip(),
        "  ".join("-" * widths[i] for i in range(len(header))).rstrip(),
    ]
    for row in rows:
        lines.append(
            "  ".join(row[i].ljust(widths[i]) for i in range(len(header))).rstrip()
        )
    return "\n".join(lines)


def _query_text(args: argparse.Namespace, config: PortalConfig) -> str:
    sources = [
        args.query is not None,
        args.file is not None,
        args.canned is not None,
    ]
    if sum(sources) != 1:
        raise ConfigError(
            "query", "give exactly one of a query string, --file, or --canned"
        )
    if args.query is not None:
        return args.query
    if args.file is not None:
        return Path(args.file).read_text(encoding="utf-8")
    params = {
        name: value
        for name, value in (
            ("station", args.station),
            ("datatype", args.datatype),
            ("start", args.start),
            ("end", args.end),
            ("date", args.date),
        )
        if value is not None
    }
    return canned_query(args.canned, config.base_iri, params)


def cmd_query(args: argparse.Namespace) -> int:
    config = load_config(args.config, os.environ)
    try:
        text = _query_text(args, config)
    except CannedQueryError as exc:
        print(str(exc), file=sys.stderr)
        return 2
    except OSError as exc:
        print(f"cannot read query file: {exc}", file=sys.stderr)
        return 1
    try:
        store = _load_store(config)
    except NTriplesError as exc:
        print(f"snapshot is corrupt: {exc}", file=sys.stderr)
        return 1
    try:
        ast = parse_query(text)
    except SparqlError as exc:
        print(f"query error: {exc}", file=sys.stderr)
        return 1
    solutions = evaluate(ast, store)
    variables = list(ast.projection)
    if args.format == "csv":
        sys.stdout.write(serialize_results_csv(variables, solutions))
    elif args.format == "structured":
        print(serialize_results_json(variables, solutions))
    else:
        print(_format_table(variables, solutions))
    print(f"{len(solutions)} row(s)", file=sys.stderr)
    return 0


# --- export / stats / validate ------------------------------------------------------


def cmd_export(args: argparse.Namespace) -> int:
    config = load_config(args.config, os.environ)
    try:
        store = _load_store(config)
    except NTriplesError as exc:
        print(f"snapshot is corrupt: {exc}", file=sys.stderr)
        return 1
    if args.format == "turtle":
        vocab = CaVocabulary.for_base(config.base_iri)
        body = serialize_turtle(store, default_prefix_map(vocab))
    else:
        body = serialize_ntriples(store)
    try:
        if args.out == "-":
            sys.stdout.write(body)
        else:
            Path(args.out).write_text(body, encoding="utf-8", newline="\n")
    except OSError as exc:
        print(f"cannot write {args.out}: {exc}", file=sys.stderr)
        return 1
    return 0


def cmd_stats(args: argparse.Namespace) -> int:
    config = load_config(args.config, os.environ)
    try:
        store = _load_store(config)
    except NTriplesError as exc:
        print(f"snapshot is corrupt: {exc}", file=sys.stderr)
        return 1
    vocab = CaVocabulary.for_base(config.base_iri)
    rdf_type = Iri(RDF_TYPE)
    stations = len(store.match(predicate=rdf_type, object=vocab.station_class))
    observations = len(store.match(predicate=rdf_type, object=vocab.observation_class))
    print(f"snapshot: {config.snapshot_path}")
    print(f"triples: {len(store)}")
    print(f"stations: {stations}")
    print(f"observations: {observations}")
    return 0


def cmd_validate(args: argparse.Namespace) -> int:
    directory = Path(args.fixtures)
    manifest_path = directory / "manifest.json"
    try:
        manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
    except FileNotFoundError:
        print(f"missing manifest: {manifest_path}", file=sys.stderr)
        return 1
    except ValueError as exc:
        print(f"corrupt manifest {manifest_path}: {exc}", file=sys.stderr)
        return 1
    failures = []
    for entry in manifest.get("responses", []):
        name = entry.get("file", "?")
        path = directory / name
        try:
            page = parse_cdo_payload(path.read_text(encoding="utf-8"), entry["endpoint"])
        except FileNotFoundError:
            failures.append(name)
            print(f"{name}: missing file")
            continue
        except CdoParseError as exc:
            failures.append(name)
            print(f"{name}: parse error: {exc}")
            continue
        count = len(page.records)
        expected = entry.get("records")
        if expected is not None and expected != count:
            failures.append(name)
            print(f"{name}: {count} record(s), manifest says {expected}")
        else:
            print(f"{name}: {count} record(s)")
    if failures:
        print("failed: " + ", ".join(failures), file=sys.stderr)
        return 1
    return 0


# --- argument parsing ---------------------------------------------------------------


def _add_source_flags(parser: argparse.ArgumentParser, required: bool) -> None:
    group = parser.add_mutually_exclusive_group(required=required)
    group.add_argument("--fixtures", type=Path, help="replay recorded API responses")
    group.add_argument("--live", action="store_true", help="call the live API")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="climate-portal",
        description="Linked-data portal for NOAA daily climate summaries",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    serve = sub.add_parser("serve", help="run the HTTP portal and refresh loop")
    serve.add_argument("--config", type=Path)
    serve.add_argument("--ui", type=Path, help="directory of explorer UI assets")
    _add_source_flags(serve, required=False)
    serve.set_defaults(handler=cmd_serve)

    ingest = sub.add_parser("ingest", help="run one fetch-map-merge cycle")
    ingest.add_argument("--config", type=Path)
    ingest.add_argument("--start", help="window start YYYY-MM-DD")
    ingest.add_argument("--end", help="window end YYYY-MM-DD")
    ingest.add_argument("--format", choices=("text", "json"), default="text")
    _add_source_flags(ingest, required=True)
    ingest.set_defaults(handler=cmd_ingest)

    query = sub.add_parser("query", help="evaluate a query against the snapshot")
    query.add_argument("query", nargs="?", help="SPARQL text")
    query.add_argument("--config", type=Path)
    query.add_argument("--file", type=Path, help="read the query from a file")
    query.add_argument(
        "--canned",
        help="run a predesigned query: "
        + "; ".join(f"{q.name} ({q.description})" for q in CANNED_QUERIES),
    )
    query.add_argument("--station", help="station id for canned queries")
    query.add_argument("--datatype", help="datatype id for canned queries")
    query.add_argument("--start", help="start date for canned queries")
    query.add_argument("--end", help="end date for canned queries")
    query.add_argument("--date", help="date for canned queries")
    query.add_argument(
        "--format", choices=("table", "csv", "structured"), default="table"
    )
    query.set_defaults(handler=cmd_query)

    export = sub.add_parser("export", help="write the snapshot in bulk form")
    export.add_argument("--config", type=Path)
    export.add_argument("--out", required=True, help="output path, or - for stdout")
    export.add_argument(
        "--format", choices=("ntriples", "turtle"), default="ntriples"
    )
    export.set_defaults(handler=cmd_export)

    stats = sub.add_parser("stats", help="summarize the snapshot")
    stats.add_argument("--config", type=Path)
    stats.set_defaults(handler=cmd_stats)

    validate = sub.add_parser("validate", help="check a fixture directory")
    validate.add_argument("--fixtures", type=Path, required=True)
    validate.set_defaults(handler=cmd_validate)

    return parser


def main(argv: Optional[list[str]] = None) -> int:
    args = build_parser().parse_args(argv)
    if not logging.getLogger().handlers:
        logging.basicConfig(
            level=logging.INFO,
            stream=sys.stderr,
            format="%(levelname)s %(name)s: %(message)s",
        )
    try:
        return args.handler(args)
    except ConfigError as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
