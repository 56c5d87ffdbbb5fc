"""Fetch NOAA records, map them to triples, merge into the store, snapshot.

The refresh loop runs one ingest at startup and one per interval. A run is
all-or-nothing with respect to the store: every page is fetched and mapped
before the first triple is inserted, so a transport failure midway leaves
both the store and the snapshot file exactly as they were.
"""

from __future__ import annotations

import contextlib
import datetime
import logging
import os
import tempfile
import threading
import time
from dataclasses import dataclass, field
from pathlib import Path
from typing import Callable, Optional

from .noaa import CdoClient, CdoError, CdoRequest
from .ontology import (
    DEFAULT_BASE,
    CaVocabulary,
    map_observation,
    map_station,
    schema_triples,
)
from .rdf.graph import Graph, Triple
from .rdf.ntriples import parse_ntriples, serialize_ntriples
from .records import ObservationRecord, StationRecord

logger = logging.getLogger(__name__)

DEFAULT_LOCATIONS = ("FIPS:EI", "FIPS:UK")


@dataclass(frozen=True)
class IngestConfig:
    base_iri: str = DEFAULT_BASE
    locations: tuple[str, ...] = DEFAULT_LOCATIONS
    dataset_id: str = "GHCND"
    window_days: int = 30
    interval: datetime.timedelta = datetime.timedelta(days=7)
    snapshot_path: Path = Path("climate.nt")
    token: str = ""

    def __post_init__(self) -> None:
        object.__setattr__(self, "locations", tuple(self.locations))
        object.__setattr__(self, "snapshot_path", Path(self.snapshot_path))
        if not self.locations:
            raise ValueError("locations must be non-empty")
        if self.window_days < 1:
            raise ValueError("window_days must be >= 1")
        if self.interval < datetime.timedelta(hours=1):
            raise ValueError("interval must be at least one hour")


@dataclass
class IngestReport:
    """Tallies for one refresh run."""

    run_started: datetime.datetime
    stations_seen: int = 0
    observations_seen: int = 0
    triples_added: int = 0
    triples_duplicate: int = 0
    retries: int = 0
    errors: list[str] = field(default_factory=list)
    duration: float = 0.0

    @property
    def ok(self) -> bool:
        return not self.errors

    def summary(self) -> str:
        status = "ok" if self.ok else "failed"
        line = (
            f"ingest {status}: stations={self.stations_seen}"
            f" observations={self.observations_seen}"
            f" added={self.triples_added} duplicate={self.triples_duplicate}"
            f" retries={self.retries} duration={self.duration:.2f}s"
        )
        if self.errors:
            line += " errors=" + "; ".join(self.errors)
        return line


def compute_window(
    now: datetime.datetime | datetime.date, window_days: int
) -> tuple[datetime.date, datetime.date]:
    """Sliding observation window ending on the calendar date of ``now``."""
    if window_days < 1:
        raise ValueError("window_days must be >= 1")
    end = now.date() if isinstance(now, datetime.datetime) else now
    return end - datetime.timedelta(days=window_days), end


def load_snapshot(path: Path | str) -> Graph:
    """Parse the snapshot file; a missing file is an empty store."""
    path = Path(path)
    try:
        text = path.read_text(encoding="utf-8")
    except FileNotFoundError:
        logger.info("no snapshot at %s, starting with an empty store", path)
        return Graph()
    return parse_ntriples(text)


def save_snapshot(graph: Graph, path: Path | str) -> None:
    """Write sorted N-Triples via a temp file so the path is always complete."""
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    text = serialize_ntriples(graph)
    handle, tmp_name = tempfile.mkstemp(
        dir=str(path.parent), prefix=path.name + ".", suffix=".tmp"
    )
    try:
        with os.fdopen(handle, "w", encoding="utf-8", newline="\n") as tmp:
            tmp.write(text)
        os.replace(tmp_name, path)
    except BaseException:
        with contextlib.suppress(OSError):
            os.unlink(tmp_name)
        raise


def run_ingest(
    config: IngestConfig,
    store: Graph,
    transport,
    now: Optional[datetime.datetime] = None,
    start_date: Optional[datetime.date] = None,
    end_date: Optional[datetime.date] = None,
    write_lock=None,
) -> IngestReport:
    """One fetch-map-merge cycle. Fetch errors abort with the store untouched."""
    started = now if now is not None else datetime.datetime.now(datetime.timezone.utc)
    report = IngestReport(run_started=started)
    clock_start = time.monotonic()
    client = CdoClient(transport, token=config.token)
    if start_date is None or end_date is None:
        window_start, window_end = compute_window(started, config.window_days)
        start_date = start_date or window_start
        end_date = end_date or window_end

    stations: dict[str, StationRecord] = {}
    observations: dict[tuple, ObservationRecord] = {}
    try:
        for location in config.locations:
            station_request = CdoRequest(
                endpoint="stations",
                dataset_id=config.dataset_id,
                location_id=location,
            )
            for record in client.fetch_all(station_request):
                stations[record.id] = record
            data_request = CdoRequest(
                endpoint="data",
                dataset_id=config.dataset_id,
                location_id=location,
                start_date=start_date,
                end_date=end_date,
            )
            for record in client.fetch_all(data_request):
                key = (record.station_id, record.date, record.datatype_id)
                observations[key] = record
    except CdoError as exc:
        report.errors.append(str(exc))
        report.retries = client.stats.retries
        report.duration = time.monotonic() - clock_start
        logger.error("ingest aborted, store unchanged: %s", exc)
        return report

    staged: list[Triple] = []
    for station in stations.values():
        staged.extend(map_station(station, config.base_iri))
    for observation in observations.values():
        staged.extend(map_observation(observation, config.base_iri))

    vocab = CaVocabulary.for_base(config.base_iri)
    guard = write_lock if write_lock is not None else contextlib.nullcontext()
    with guard:
        # re-merging the schema is free; its duplicates are not data duplicates
        for triple in schema_triples(vocab):
            if store.insert(triple):
                report.triples_added += 1
        for triple in staged:
            if store.insert(triple):
                report.triples_added += 1
            else:
                report.triples_duplicate += 1

    report.stations_seen = len(stations)
    report.observations_seen = len(observations)
    report.retries = client.stats.retries

    try:
        save_snapshot(store, config.snapshot_path)
    except OSError as exc:
        report.errors.append(f"snapshot write failed: {exc}")
        logger.error("snapshot write failed: %s", exc)

    report.duration = time.monotonic() - clock_start
    logger.info("%s", report.summary())
    return report


class SystemClock:
    def now(self) -> datetime.datetime:
        return datetime.datetime.now(datetime.timezone.utc)

    def sleep(self, seconds: float) -> None:
        time.sleep(seconds)


def schedule_loop(
    config: IngestConfig,
    store: Graph,
    transport,
    clock=None,
    shutdown: Optional[threading.Event] = None,
    on_report: Optional[Callable[[IngestReport], None]] = None,
    poll_seconds: float = 1.0,
    write_lock=None,
) -> None:
    """Run an ingest now and then one per interval until ``shutdown`` is set.

    Runs never overlap: ticks that elapse while a run is still executing are
    skipped (and logged), and the next run waits for a future tick.
    """
    clock = clock if clock is not None else SystemClock()
    shutdown = shutdown if shutdown is not None else threading.Event()
    next_run = clock.now()
    while not shutdown.is_set():
        now = clock.now()
        if now < next_run:
            remaining = (next_run - now).total_seconds()
            clock.sleep(min(poll_seconds, remaining))
            continue
        report = run_ingest(config, store, transport, now=now, write_lock=write_lock)
        if not report.ok:
            logger.error("scheduled ingest failed: %s", "; ".join(report.errors))
        if on_report is not None:
            on_report(report)
        next_run += config.interval
        skipped = 0
        finished = clock.now()
        while next_run <= finished:
            next_run += config.interval
            skipped += 1
        if skipped:
            logger.warning(
                "ingest overran the refresh interval, skipped %d tick(s)", skipped
            )
