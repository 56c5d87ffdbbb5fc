"""Validated station and observation records, the unit of ingestion.

Records sit between the NOAA payload parser and the RDF mapping: parsing
produces them, mapping consumes them, and the invariants live here so bad
upstream data fails loudly with the offending field named.
"""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass
from decimal import Decimal, InvalidOperation
from typing import Optional, Union

_DATATYPE_ID_RE = re.compile(r"^[A-Z0-9]+$")

NumberLike = Union[Decimal, int, float, str]


class RecordError(ValueError):
    """A record field failed validation; `field` names the culprit."""

    def __init__(self, field: str, message: str) -> None:
        super().__init__(f"{field}: {message}")
        self.field = field


def _require_decimal(field: str, value: NumberLike) -> Decimal:
    if isinstance(value, bool):
        raise RecordError(field, f"expected a number, got {value!r}")
    if isinstance(value, Decimal):
        result = value
    elif isinstance(value, int):
        result = Decimal(value)
    elif isinstance(value, (float, str)):
        try:
            result = Decimal(str(value))
        except InvalidOperation:
            raise RecordError(field, f"not a number: {value!r}") from None
    else:
        raise RecordError(field, f"expected a number, got {type(value).__name__}")
    if not result.is_finite():
        raise RecordError(field, f"not a finite number: {value!r}")
    return result


def require_station_id(field: str, value: str) -> str:
    if not isinstance(value, str) or not value:
        raise RecordError(field, "must be non-empty text")
    if any(ch.isspace() for ch in value):
        raise RecordError(field, f"must not contain whitespace: {value!r}")
    return value


@dataclass(frozen=True)
class StationRecord:
    """One NOAA station: identifier, display name, and coordinates."""

    id: str
    name: str
    latitude: Decimal
    longitude: Decimal
    elevation: Optional[Decimal] = None

    def __post_init__(self) -> None:
        object.__setattr__(self, "id", require_station_id("id", self.id))
        if not isinstance(self.name, str):
            raise RecordError("name", "must be text")
        lat = _require_decimal("latitude", self.latitude)
        if not -90 <= lat <= 90:
            raise RecordError("latitude", f"out of range [-90, 90]: {lat}")
        lon = _require_decimal("longitude", self.longitude)
        if not -180 <= lon <= 180:
            raise RecordError("longitude", f"out of range [-180, 180]: {lon}")
        object.__setattr__(self, "latitude", lat)
        object.__setattr__(self, "longitude", lon)
        if self.elevation is not None:
            object.__setattr__(
                self, "elevation", _require_decimal("elevation", self.elevation)
            )


@dataclass(frozen=True)
class ObservationRecord:
    """One daily value: station, NOAA datatype code, date, reported value."""

    station_id: str
    datatype_id: str
    date: datetime.date
    value: Decimal

    def __post_init__(self) -> None:
        object.__setattr__(
            self, "station_id", require_station_id("station_id", self.station_id)
        )
        if not isinstance(self.datatype_id, str) or not _DATATYPE_ID_RE.match(
            self.datatype_id
        ):
            raise RecordError(
                "datatype_id",
                f"must be uppercase letters and digits: {self.datatype_id!r}",
            )
        if not isinstance(self.date, datetime.date) or isinstance(
            self.date, datetime.datetime
        ):
            raise RecordError("date", f"must be a calendar date: {self.date!r}")
        object.__setattr__(self, "value", _require_decimal("value", self.value))
