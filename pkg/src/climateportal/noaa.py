"""Client for NOAA Climate Data Online (CDO) v2: fetch, parse, paginate.

The HTTP layer is injected as a transport object, so the same client runs
against the live API or against recorded fixture files. All numbers in
payloads are parsed as Decimal to keep NOAA's lexical values intact.
"""

from __future__ import annotations

import csv
import datetime
import io
import json
import random
import re
import time
from dataclasses import dataclass, replace
from decimal import Decimal, InvalidOperation
from pathlib import Path
from typing import Callable, NamedTuple, Optional, Union

import requests

from climateportal.records import ObservationRecord, RecordError, StationRecord

API_BASE = "https://www.ncdc.noaa.gov/cdo-web/api/v2"

ENDPOINTS = ("stations", "data")

# wide-CSV columns that are never datatype codes
_NON_DATATYPE_COLUMNS = {"STATION", "NAME", "DATE", "LATITUDE", "LONGITUDE", "ELEVATION"}
_DATATYPE_COLUMN_RE = re.compile(r"^[A-Z0-9]+$")


class CdoError(Exception):
    """Base error; carries the request descriptor when one applies."""

    def __init__(self, message: str, request: Optional["CdoRequest"] = None) -> None:
        if request is not None:
            message = f"{message} [{request.describe()}]"
        super().__init__(message)
        self.request = request


class CdoRequestError(CdoError):
    """The API rejected the request (HTTP 400)."""


class CdoAuthError(CdoError):
    """Missing or rejected token (HTTP 401/403)."""


class CdoTransportError(CdoError):
    """Network failure or retry exhaustion."""


class CdoParseError(CdoError):
    """Payload did not match the documented envelope."""


class CdoTimeout(Exception):
    """Raised by transports on request timeout; always retryable."""


@dataclass(frozen=True)
class CdoRequest:
    endpoint: str
    dataset_id: str = "GHCND"
    location_id: Optional[str] = None
    station_ids: tuple[str, ...] = ()
    start_date: Optional[datetime.date] = None
    end_date: Optional[datetime.date] = None
    limit: int = 1000
    offset: int = 1

    def __post_init__(self) -> None:
        if self.endpoint not in ENDPOINTS:
            raise ValueError(f"unknown endpoint {self.endpoint!r}, expected one of {ENDPOINTS}")
        if not 1 <= self.limit <= 1000:
            raise ValueError(f"limit must be in 1..1000, got {self.limit}")
        if self.offset < 1:
            raise ValueError(f"offset must be >= 1, got {self.offset}")
        if self.start_date is not None and self.end_date is not None:
            if self.start_date > self.end_date:
                raise ValueError("start_date must not be after end_date")
            if (self.end_date - self.start_date).days > 365:
                raise ValueError("date window must not exceed 365 days")

    def query_params(self) -> dict[str, str]:
        params = {"datasetid": self.dataset_id}
        if self.location_id:
            params["locationid"] = self.location_id
        if self.station_ids:
            params["stationid"] = ",".join(self.station_ids)
        if self.start_date:
            params["startdate"] = self.start_date.isoformat()
        if self.end_date:
            params["enddate"] = self.end_date.isoformat()
        params["limit"] = str(self.limit)
        params["offset"] = str(self.offset)
        return params

    def with_offset(self, offset: int) -> "CdoRequest":
        return replace(self, offset=offset)

    def describe(self) -> str:
        parts = [self.endpoint, self.dataset_id]
        if self.location_id:
            parts.append(self.location_id)
        if self.start_date and self.end_date:
            parts.append(f"{self.start_date.isoformat()}..{self.end_date.isoformat()}")
        parts.append(f"offset={self.offset}")
        return " ".join(parts)


Record = Union[StationRecord, ObservationRecord]


@dataclass(frozen=True)
class CdoPage:
    records: tuple[Record, ...]
    total_count: int
    offset: int
    limit: int

    def __post_init__(self) -> None:
        if self.total_count < 0:
            raise ValueError("total_count must be >= 0")
        if self.offset < 1:
            raise ValueError("offset must be >= 1")
        if len(self.records) > self.limit and self.limit > 0:
            raise ValueError("page holds more records than its limit")
        if self.total_count > 0 and self.offset + len(self.records) - 1 > self.total_count:
            raise ValueError("page extends past total_count")


class HttpResponse(NamedTuple):
    status: int
    body: str


class LiveTransport:
    """Real HTTP against the CDO API."""

    def __init__(self, api_base: str = API_BASE, timeout: float = 30.0) -> None:
        self.api_base = api_base.rstrip("/")
        self.timeout = timeout

    def send(self, endpoint: str, params: dict[str, str], headers: dict[str, str]) -> HttpResponse:
        try:
            response = requests.get(
                f"{self.api_base}/{endpoint}",
                params=params,
                headers=headers,
                timeout=self.timeout,
            )
        except requests.Timeout as exc:
            raise CdoTimeout(str(exc)) from exc
        except requests.RequestException as exc:
            raise CdoTransportError(f"network failure: {exc}") from exc
        return HttpResponse(response.status_code, response.text)


class FixtureTransport:
    """Replays captured response bodies from a manifest directory.

    The manifest maps request descriptors to files; an entry matches when
    its params are a subset of the request's, so recorded pages keep
    matching even as computed date windows move.
    """

    def __init__(self, directory) -> None:
        self.directory = Path(directory)
        manifest_path = self.directory / "manifest.json"
        try:
            manifest = json.loads(manifest_path.read_text(encoding="utf-8"))
        except FileNotFoundError:
            raise CdoTransportError(f"fixture manifest not found: {manifest_path}") from None
        except ValueError as exc:
            raise CdoTransportError(f"fixture manifest unreadable: {exc}") from None
        self.entries = manifest.get("responses", [])

    def send(self, endpoint: str, params: dict[str, str], headers: dict[str, str]) -> HttpResponse:
        for entry in self.entries:
            if entry.get("endpoint") != endpoint:
                continue
            wanted = entry.get("params", {})
            if all(params.get(key) == value for key, value in wanted.items()):
                body = (self.directory / entry["file"]).read_text(encoding="utf-8")
                return HttpResponse(entry.get("status", 200), body)
        raise CdoTransportError(f"no fixture recorded for {endpoint} {params}")


@dataclass(frozen=True)
class RetryPolicy:
    retries: int = 3
    base_delay: float = 1.0
    jitter: float = 0.2

    def delay(self, attempt: int, rng: random.Random) -> float:
        # 1s, 2s, 4s ... with +/-20% jitter
        base = self.base_delay * (2**attempt)
        return base * (1 + rng.uniform(-self.jitter, self.jitter))


@dataclass
class ClientStats:
    retries: int = 0
    conflicts: int = 0


def _parse_date_field(raw, index: int, fieldname: str) -> datetime.date:
    if not isinstance(raw, str):
        raise CdoParseError(f"record {index}: field {fieldname!r} is not a date string")
    try:
        return datetime.date.fromisoformat(raw.split("T")[0])
    except ValueError:
        raise CdoParseError(
            f"record {index}: field {fieldname!r} has unparseable date {raw!r}"
        ) from None


def _require_field(row: dict, index: int, fieldname: str):
    if fieldname not in row or row[fieldname] is None:
        raise CdoParseError(f"record {index}: missing field {fieldname!r}")
    return row[fieldname]


def parse_cdo_payload(text: str, endpoint: str) -> CdoPage:
    """Parse one CDO response envelope into a page of records."""
    if endpoint not in ENDPOINTS:
        raise CdoParseError(f"unknown endpoint {endpoint!r}")
    try:
        doc = json.loads(text, parse_float=Decimal)
    except (ValueError, TypeError) as exc:
        raise CdoParseError(f"response is not valid JSON: {exc}") from None
    if not isinstance(doc, dict):
        raise CdoParseError("response is not a JSON object")

    resultset = doc.get("metadata", {})
    if not isinstance(resultset, dict):
        raise CdoParseError("metadata is not an object")
    resultset = resultset.get("resultset", {})
    if not isinstance(resultset, dict):
        raise CdoParseError("metadata.resultset is not an object")

    rows = doc.get("results", [])
    if not isinstance(rows, list):
        raise CdoParseError("results is not a list")

    def _int_field(name: str, default: int) -> int:
        value = resultset.get(name, default)
        if isinstance(value, bool) or not isinstance(value, int):
            raise CdoParseError(f"metadata.resultset.{name} is not an integer")
        return value

    total_count = _int_field("count", len(rows))
    offset = _int_field("offset", 1)
    limit = _int_field("limit", max(len(rows), 1))

    records: list[Record] = []
    for index, row in enumerate(rows):
        if not isinstance(row, dict):
            raise CdoParseError(f"record {index}: not an object")
        try:
            if endpoint == "stations":
                records.append(
                    StationRecord(
                        id=_require_field(row, index, "id"),
                        name=_require_field(row, index, "name"),
                        latitude=_require_field(row, index, "latitude"),
                        longitude=_require_field(row, index, "longitude"),
                        elevation=row.get("elevation"),
                    )
                )
            else:
                records.append(
                    ObservationRecord(
                        station_id=_require_field(row, index, "station"),
                        datatype_id=_require_field(row, index, "datatype"),
                        date=_parse_date_field(_require_field(row, index, "date"), index, "date"),
                        value=_require_field(row, index, "value"),
                    )
                )
        except RecordError as exc:
            raise CdoParseError(f"record {index}: invalid field {exc.field}: {exc}") from None

    try:
        return CdoPage(
            records=tuple(records), total_count=total_count, offset=offset, limit=limit
        )
    except ValueError as exc:
        raise CdoParseError(f"inconsistent page envelope: {exc}") from None


def parse_cdo_csv(text: str) -> list[ObservationRecord]:
    """Parse either NOAA CSV shape into observation records.

    Narrow form: header station,datatype,date,value with one record per
    row. Wide form: the daily-summaries export with STATION and DATE
    columns plus one column per datatype code; blank cells are skipped.
    """
    if not isinstance(text, str):
        raise CdoParseError("CSV input is not text")
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except (StopIteration, csv.Error):
        raise CdoParseError("CSV input is empty") from None
    columns = [cell.strip().upper() for cell in header]

    def build(index, station, datatype, raw_date, raw_value) -> ObservationRecord:
        date = _parse_date_field(raw_date, index, "date")
        try:
            value = Decimal(str(raw_value).strip())
        except InvalidOperation:
            raise CdoParseError(
                f"record {index}: field 'value' is not a number: {raw_value!r}"
            ) from None
        try:
            return ObservationRecord(
                station_id=station.strip(), datatype_id=datatype, date=date, value=value
            )
        except RecordError as exc:
            raise CdoParseError(f"record {index}: invalid field {exc.field}: {exc}") from None

    try:
        data_rows = list(reader)
    except csv.Error as exc:
        raise CdoParseError(f"malformed CSV: {exc}") from None

    if {"STATION", "DATATYPE", "DATE", "VALUE"} <= set(columns):
        at = {name: columns.index(name) for name in ("STATION", "DATATYPE", "DATE", "VALUE")}
        records = []
        for index, row in enumerate(data_rows):
            if not any(cell.strip() for cell in row):
                continue
            if len(row) < len(columns):
                raise CdoParseError(f"record {index}: row has too few cells")
            records.append(
                build(
                    index,
                    row[at["STATION"]],
                    row[at["DATATYPE"]].strip().upper(),
                    row[at["DATE"]].strip(),
                    row[at["VALUE"]],
                )
            )
        return records

    if "STATION" in columns and "DATE" in columns:
        datatype_columns = [
            (position, name)
            for position, name in enumerate(columns)
            if name not in _NON_DATATYPE_COLUMNS and _DATATYPE_COLUMN_RE.match(name)
        ]
        if not datatype_columns:
            raise CdoParseError(
                "wide CSV has no datatype columns; expected codes like TMAX, PRCP"
            )
        station_at = columns.index("STATION")
        date_at = columns.index("DATE")
        records = []
        for index, row in enumerate(data_rows):
            if not any(cell.strip() for cell in row):
                continue
            if station_at >= len(row) or date_at >= len(row):
                raise CdoParseError(f"record {index}: row lacks station/date cells")
            for position, name in datatype_columns:
                cell = row[position].strip() if position < len(row) else ""
                if not cell:
                    continue
                records.append(build(index, row[station_at], name, row[date_at].strip(), cell))
        return records

    raise CdoParseError(
        "unrecognized CSV header; expected station,datatype,date,value "
        "or a daily-summaries export with STATION and DATE columns"
    )


class CdoClient:
    """Issues CDO requests through a transport with retry and pagination."""

    def __init__(
        self,
        transport,
        token: str = "",
        retry: RetryPolicy = RetryPolicy(),
        sleeper: Callable[[float], None] = time.sleep,
        rng: Optional[random.Random] = None,
    ) -> None:
        self.transport = transport
        self.token = token
        self.retry = retry
        self.sleeper = sleeper
        self.rng = rng or random.Random()
        self.stats = ClientStats()

    def fetch_page(self, request: CdoRequest) -> CdoPage:
        headers = {"token": self.token} if self.token else {}
        params = request.query_params()
        attempt = 0
        while True:
            retryable: Optional[str] = None
            try:
                response = self.transport.send(request.endpoint, params, headers)
            except CdoTimeout as exc:
                retryable = f"timeout: {exc}"
            else:
                if response.status == 200:
                    try:
                        return parse_cdo_payload(response.body, request.endpoint)
                    except CdoParseError as exc:
                        raise CdoParseError(str(exc), request) from None
                if response.status == 400:
                    raise CdoRequestError(self._api_message(response), request)
                if response.status in (401, 403):
                    raise CdoAuthError(self._api_message(response), request)
                if response.status == 429 or response.status >= 500:
                    retryable = f"status {response.status}"
                else:
                    raise CdoTransportError(
                        f"unexpected status {response.status}", request
                    )
            if attempt >= self.retry.retries:
                raise CdoTransportError(
                    f"retries exhausted after {attempt} retries ({retryable})", request
                )
            self.sleeper(self.retry.delay(attempt, self.rng))
            self.stats.retries += 1
            attempt += 1

    @staticmethod
    def _api_message(response: HttpResponse) -> str:
        try:
            doc = json.loads(response.body)
            if isinstance(doc, dict) and doc.get("message"):
                return f"status {response.status}: {doc['message']}"
        except ValueError:
            pass
        return f"status {response.status}"

    def fetch_all(self, request: CdoRequest) -> list[Record]:
        """All pages of a request, deduplicated by record identity."""
        page = self.fetch_page(request)
        total = page.total_count
        collected = list(page.records)
        offset = request.offset
        while offset + request.limit <= total:
            offset += request.limit
            page = self.fetch_page(request.with_offset(offset))
            collected.extend(page.records)
        by_identity: dict[tuple, Record] = {}
        for record in collected:
            if isinstance(record, StationRecord):
                key = ("station", record.id)
            else:
                key = ("obs", record.station_id, record.date, record.datatype_id)
            if key in by_identity and by_identity[key] != record:
                # NOAA corrections: last value wins
                self.stats.conflicts += 1
            by_identity[key] = record
        return list(by_identity.values())
