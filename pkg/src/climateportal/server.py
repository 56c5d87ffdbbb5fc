"""HTTP portal: SPARQL endpoint, URI dereferencing, entity descriptions.

All handlers are readers. Writes happen only inside the ingest scheduler,
which shares this module's read-write lock so every request sees either the
pre-run or the post-run store, never a half-merged one.
"""

from __future__ import annotations

import datetime
import html
import json
import re
import threading
import urllib.parse
from dataclasses import dataclass
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.middleware.cors import CORSMiddleware
from fastapi.responses import HTMLResponse, JSONResponse, PlainTextResponse, Response
from fastapi.staticfiles import StaticFiles

from .ingest import IngestReport
from .ontology import (
    DEFAULT_BASE,
    CaVocabulary,
    default_prefix_map,
    observation_uri,
    station_uri,
)
from .rdf.graph import Graph, Triple
from .rdf.ntriples import serialize_ntriples
from .rdf.terms import RDF_TYPE, RDFS_LABEL, Iri, Literal, Term, TermError
from .rdf.turtle import serialize_turtle
from .records import RecordError, require_station_id
from .sparql.evaluator import evaluate_bounded
from .sparql.parser import SparqlError, parse_query
from .sparql.results import serialize_results_csv, serialize_results_json, term_json

ENTITY_MEDIA_TYPES = (
    "text/turtle",
    "text/html",
    "application/json",
    "application/n-triples",
)
SPARQL_RESULTS_JSON = "application/sparql-results+json"
SPARQL_MEDIA_TYPES = (SPARQL_RESULTS_JSON, "text/csv")

_DATATYPE_SEGMENT_RE = re.compile(r"^[A-Z0-9]+$")
_DATE_SEGMENT_RE = re.compile(r"^\d{4}-\d{2}-\d{2}$")
_BAD_PERCENT_RE = re.compile(rb"%(?![0-9A-Fa-f]{2})")


class ReadWriteLock:
    """Many concurrent readers or one exclusive writer."""

    def __init__(self) -> None:
        self._cond = threading.Condition()
        self._readers = 0
        self._writing = False
        self.reading = _Guard(self._acquire_read, self._release_read)
        self.writing = _Guard(self._acquire_write, self._release_write)

    def _acquire_read(self) -> None:
        with self._cond:
            while self._writing:
                self._cond.wait()
            self._readers += 1

    def _release_read(self) -> None:
        with self._cond:
            self._readers -= 1
            if self._readers == 0:
                self._cond.notify_all()

    def _acquire_write(self) -> None:
        with self._cond:
            while self._writing or self._readers:
                self._cond.wait()
            self._writing = True

    def _release_write(self) -> None:
        with self._cond:
            self._writing = False
            self._cond.notify_all()


class _Guard:
    """Reusable context manager delegating to lock methods."""

    def __init__(self, acquire, release) -> None:
        self._acquire = acquire
        self._release = release

    def __enter__(self) -> None:
        self._acquire()

    def __exit__(self, *_exc) -> bool:
        self._release()
        return False


@dataclass
class EntityDescription:
    """One entity's outbound properties and inbound references."""

    subject: Iri
    label: Optional[str]
    outbound: list[tuple[Iri, Term]]
    inbound: list[tuple[Term, Iri]]


def describe_entity(store: Graph, subject: Iri) -> EntityDescription:
    outbound = [(t.predicate, t.object) for t in store.match(subject=subject)]
    inbound = [(t.subject, t.predicate) for t in store.match(object=subject)]
    label = None
    for predicate, value in outbound:
        if predicate.value == RDFS_LABEL and isinstance(value, Literal):
            label = value.lexical
            break
    return EntityDescription(subject=subject, label=label, outbound=outbound, inbound=inbound)


# --- content negotiation --------------------------------------------------------


def _parse_accept(header: str) -> list[tuple[str, float, int]]:
    entries = []
    for order, part in enumerate(header.split(",")):
        pieces = part.strip().split(";")
        media = pieces[0].strip().lower()
        if not media:
            continue
        quality = 1.0
        for param in pieces[1:]:
            name, _, value = param.strip().partition("=")
            if name.strip().lower() == "q":
                try:
                    quality = float(value.strip())
                except ValueError:
                    quality = 1.0
        entries.append((media, quality, order))
    return entries


def negotiate(accept: Optional[str]) -> Optional[str]:
    """Pick an entity media type; None means nothing acceptable (406)."""
    if accept is None or not accept.strip():
        return "text/turtle"
    best: Optional[tuple[tuple[float, int, int], str]] = None
    for media, quality, order in _parse_accept(accept):
        if quality <= 0:
            continue
        if media == "*/*":
            covered = ENTITY_MEDIA_TYPES
        elif media.endswith("/*"):
            prefix = media[:-1]
            covered = tuple(m for m in ENTITY_MEDIA_TYPES if m.startswith(prefix))
        elif media in ENTITY_MEDIA_TYPES:
            covered = (media,)
        else:
            continue
        for candidate in covered:
            key = (-quality, order, ENTITY_MEDIA_TYPES.index(candidate))
            if best is None or key < best[0]:
                best = (key, candidate)
    return best[1] if best else None


def negotiate_sparql(accept: Optional[str]) -> Optional[str]:
    """Result format for /sparql: "json" (default) or "csv"."""
    if accept is None or not accept.strip():
        return "json"
    entries = [e for e in _parse_accept(accept) if e[1] > 0]
    for media, _quality, _order in sorted(entries, key=lambda e: (-e[1], e[2])):
        if media in (SPARQL_RESULTS_JSON, "application/json", "*/*", "application/*"):
            return "json"
        if media in ("text/csv", "text/*"):
            return "csv"
    return None


# --- rendering ------------------------------------------------------------------


def _entity_graph(desc: EntityDescription) -> Graph:
    graph = Graph()
    for predicate, value in desc.outbound:
        graph.insert(Triple(desc.subject, predicate, value))
    for subject, predicate in desc.inbound:
        graph.insert(Triple(subject, predicate, desc.subject))
    return graph


def _is_expandable(term: Term, base: str) -> bool:
    return isinstance(term, Iri) and term.value.startswith(base + "/")


def _neighbor_payload(desc: EntityDescription, base: str, inbound_cap: int) -> dict:
    outbound = [
        {
            "predicate": predicate.value,
            "object": term_json(value),
            "expandable": _is_expandable(value, base),
        }
        for predicate, value in desc.outbound
    ]
    inbound = [
        {
            "subject": term_json(subject),
            "predicate": predicate.value,
            "expandable": _is_expandable(subject, base),
        }
        for subject, predicate in desc.inbound[:inbound_cap]
    ]
    return {
        "subject": desc.subject.value,
        "label": desc.label,
        "outbound": outbound,
        "inbound": inbound,
        "inbound_total": len(desc.inbound),
    }


def _href(term: Iri, base: str) -> str:
    if term.value.startswith(base + "/"):
        return term.value[len(base):]
    return term.value


def _term_html(term: Term, base: str) -> str:
    if isinstance(term, Iri):
        target = html.escape(_href(term, base), quote=True)
        return f'<a href="{target}">{html.escape(term.value)}</a>'
    if isinstance(term, Literal):
        text = html.escape(term.lexical)
        if term.language:
            return f"{text} <small>@{html.escape(term.language)}</small>"
        return text
    return html.escape(f"_:{term.label}")


def _entity_html(desc: EntityDescription, base: str) -> str:
    subject = desc.subject.value
    title = html.escape(desc.label or subject)
    explorer = "/ui/?focus=" + urllib.parse.quote(subject, safe="")
    outbound_rows = "\n".join(
        f"<tr><td>{_term_html(p, base)}</td><td>{_term_html(o, base)}</td></tr>"
        for p, o in desc.outbound
    )
    inbound_rows = "\n".join(
        f"<tr><td>{_term_html(s, base)}</td><td>{_term_html(p, base)}</td></tr>"
        for s, p in desc.inbound
    )
    return f"""<!DOCTYPE html>
<html>
<head>
<meta charset="utf-8">
<title>{title}</title>
<style>
body {{ font-family: sans-serif; margin: 2rem; }}
table {{ border-collapse: collapse; margin-bottom: 1.5rem; }}
td, th {{ border: 1px solid #ccc; padding: 0.3rem 0.6rem; text-align: left; }}
</style>
</head>
<body>
<h1>{title}</h1>
<p><code>{html.escape(subject)}</code></p>
<p><a href="{html.escape(explorer, quote=True)}">Open in the explorer</a></p>
<h2>Properties</h2>
<table><tr><th>Predicate</th><th>Value</th></tr>
{outbound_rows}
</table>
<h2>Referenced by</h2>
<table><tr><th>Subject</th><th>Predicate</th></tr>
{inbound_rows}
</table>
</body>
</html>
"""


def _not_found(subject: Iri, media_type: str) -> Response:
    value = subject.value
    if media_type == "text/html":
        body = (
            "<!DOCTYPE html>\n<html><head><meta charset=\"utf-8\">"
            "<title>Not found</title></head><body>"
            f"<h1>Not found</h1><p>No triples for <code>{html.escape(value)}</code>.</p>"
            "</body></html>"
        )
        return HTMLResponse(body, status_code=404)
    if media_type == "application/json":
        return JSONResponse({"error": "not found", "subject": value}, status_code=404)
    comment = f"# no triples for <{value}>\n"
    return Response(comment, status_code=404, media_type=media_type)


def _not_acceptable(supported: tuple[str, ...]) -> Response:
    return PlainTextResponse(
        "not acceptable; supported types: " + ", ".join(supported), status_code=406
    )


# --- application ----------------------------------------------------------------


@dataclass
class PortalState:
    store: Graph
    base_iri: str
    lock: ReadWriteLock
    vocab: CaVocabulary
    query_timeout: float
    result_cap: int
    inbound_cap: int
    last_report: Optional[IngestReport] = None


def create_app(
    store: Graph,
    base_iri: str = DEFAULT_BASE,
    lock: Optional[ReadWriteLock] = None,
    ui_dir: Optional[Path] = None,
    query_timeout: float = 10.0,
    result_cap: int = 10_000,
    inbound_cap: int = 200,
) -> FastAPI:
    base = base_iri.rstrip("/")
    state = PortalState(
        store=store,
        base_iri=base,
        lock=lock if lock is not None else ReadWriteLock(),
        vocab=CaVocabulary.for_base(base),
        query_timeout=query_timeout,
        result_cap=result_cap,
        inbound_cap=inbound_cap,
    )
    app = FastAPI(openapi_url=None, docs_url=None, redoc_url=None)
    app.state.portal = state
    app.add_middleware(
        CORSMiddleware,
        allow_origins=["*"],
        allow_methods=["GET", "POST", "OPTIONS"],
        allow_headers=["*"],
    )

    cors = {"Access-Control-Allow-Origin": "*"}

    def run_sparql(query_text: Optional[str], accept: Optional[str]) -> Response:
        media = negotiate_sparql(accept)
        if media is None:
            return _not_acceptable(SPARQL_MEDIA_TYPES)
        if query_text is None or not query_text.strip():
            return PlainTextResponse(
                "missing query", status_code=400, headers=cors
            )
        try:
            ast = parse_query(query_text)
        except SparqlError as exc:
            return PlainTextResponse(f"query error: {exc}", status_code=400, headers=cors)
        with state.lock.reading:
            solutions, truncated = evaluate_bounded(
                ast,
                state.store,
                max_rows=state.result_cap,
                timeout_seconds=state.query_timeout,
            )
        variables = list(ast.projection)
        headers = dict(cors)
        headers["X-Result-Truncated"] = "true" if truncated else "false"
        if media == "csv":
            return Response(
                serialize_results_csv(variables, solutions),
                media_type="text/csv",
                headers=headers,
            )
        payload = json.loads(serialize_results_json(variables, solutions))
        payload["truncated"] = truncated
        return JSONResponse(payload, media_type=SPARQL_RESULTS_JSON, headers=headers)

    @app.get("/sparql")
    def sparql_get(request: Request) -> Response:
        return run_sparql(
            request.query_params.get("query"), request.headers.get("accept")
        )

    @app.post("/sparql")
    async def sparql_post(request: Request) -> Response:
        content_type = request.headers.get("content-type", "")
        media = content_type.split(";")[0].strip().lower()
        body = await request.body()
        if media == "application/sparql-query":
            query_text = body.decode("utf-8", errors="replace")
        elif media == "application/x-www-form-urlencoded":
            form = urllib.parse.parse_qs(body.decode("utf-8", errors="replace"))
            values = form.get("query", [])
            query_text = values[0] if values else None
        else:
            return PlainTextResponse(
                "unsupported content type; use application/sparql-query"
                " or application/x-www-form-urlencoded",
                status_code=400,
                headers=cors,
            )
        return run_sparql(query_text, request.headers.get("accept"))

    def dereference(subject: Iri, request: Request) -> Response:
        raw_path = request.scope.get("raw_path", b"")
        if raw_path and _BAD_PERCENT_RE.search(raw_path):
            return PlainTextResponse("undecodable path", status_code=400)
        media = negotiate(request.headers.get("accept"))
        if media is None:
            return _not_acceptable(ENTITY_MEDIA_TYPES)
        with state.lock.reading:
            desc = describe_entity(state.store, subject)
            if not desc.outbound and not desc.inbound:
                return _not_found(subject, media)
            if media == "text/turtle":
                body = serialize_turtle(_entity_graph(desc), default_prefix_map(state.vocab))
                return Response(body, media_type="text/turtle")
            if media == "application/n-triples":
                body = serialize_ntriples(_entity_graph(desc))
                return Response(body, media_type="application/n-triples")
            if media == "application/json":
                return JSONResponse(_neighbor_payload(desc, base, len(desc.inbound)))
            return HTMLResponse(_entity_html(desc, base))

    @app.get("/station/{station_id}")
    def station_page(station_id: str, request: Request) -> Response:
        try:
            require_station_id("station id", station_id)
        except RecordError as exc:
            return PlainTextResponse(str(exc), status_code=400)
        return dereference(station_uri(base, station_id), request)

    @app.get("/obs/{station_id}/{date_text}/{datatype_id}")
    def observation_page(
        station_id: str, date_text: str, datatype_id: str, request: Request
    ) -> Response:
        try:
            require_station_id("station id", station_id)
        except RecordError as exc:
            return PlainTextResponse(str(exc), status_code=400)
        if not _DATE_SEGMENT_RE.match(date_text):
            return PlainTextResponse("date must be YYYY-MM-DD", status_code=400)
        try:
            date_value = datetime.date.fromisoformat(date_text)
        except ValueError:
            return PlainTextResponse("date must be a real calendar date", status_code=400)
        if not _DATATYPE_SEGMENT_RE.match(datatype_id):
            return PlainTextResponse(
                "datatype must be uppercase letters and digits", status_code=400
            )
        subject = observation_uri(base, station_id, date_value, datatype_id)
        return dereference(subject, request)

    @app.get("/describe")
    def describe(request: Request) -> Response:
        uri = request.query_params.get("uri")
        if uri is None or not uri.strip():
            return PlainTextResponse("missing uri parameter", status_code=400, headers=cors)
        try:
            subject = Iri(uri)
        except TermError as exc:
            return PlainTextResponse(
                f"uri must be an absolute IRI: {exc}", status_code=400, headers=cors
            )
        with state.lock.reading:
            desc = describe_entity(state.store, subject)
            payload = _neighbor_payload(desc, base, state.inbound_cap)
        return JSONResponse(payload, headers=cors)

    @app.get("/healthz")
    def healthz() -> Response:
        return PlainTextResponse("ok")

    @app.get("/stats")
    def stats() -> Response:
        rdf_type = Iri(RDF_TYPE)
        with state.lock.reading:
            triples = len(state.store)
            stations = len(
                state.store.match(predicate=rdf_type, object=state.vocab.station_class)
            )
            observations = len(
                state.store.match(predicate=rdf_type, object=state.vocab.observation_class)
            )
        report = state.last_report
        last = None
        if report is not None:
            last = {
                "run_started": report.run_started.isoformat(),
                "stations_seen": report.stations_seen,
                "observations_seen": report.observations_seen,
                "triples_added": report.triples_added,
                "triples_duplicate": report.triples_duplicate,
                "retries": report.retries,
                "errors": list(report.errors),
                "duration": report.duration,
                "summary": report.summary(),
            }
        return JSONResponse(
            {
                "triples": triples,
                "stations": stations,
                "observations": observations,
                "last_ingest": last,
            }
        )

    if ui_dir is not None and Path(ui_dir).is_dir():
        app.mount("/ui", StaticFiles(directory=str(ui_dir), html=True), name="ui")

    return app
