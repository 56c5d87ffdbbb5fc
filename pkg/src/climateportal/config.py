"""Flat key=value configuration with environment overrides."""

from __future__ import annotations

import datetime
import re
from dataclasses import dataclass, replace
from pathlib import Path
from typing import Mapping, Optional

from .ingest import DEFAULT_LOCATIONS
from .noaa import API_BASE
from .ontology import DEFAULT_BASE


class ConfigError(ValueError):
    """Invalid configuration; names the offending key (or file)."""

    def __init__(self, key: str, message: str) -> None:
        super().__init__(f"{key}: {message}")
        self.key = key


@dataclass(frozen=True)
class PortalConfig:
    base_iri: str = DEFAULT_BASE
    listen: str = "127.0.0.1:8000"
    snapshot_path: Path = Path("climate.nt")
    locations: tuple[str, ...] = DEFAULT_LOCATIONS
    window_days: int = 30
    interval: datetime.timedelta = datetime.timedelta(days=7)
    api_base: str = API_BASE
    query_timeout: float = 10.0
    http_timeout: float = 30.0
    token: str = ""

    def host_and_port(self) -> tuple[str, int]:
        host, _, port_text = self.listen.rpartition(":")
        if not host or not port_text.isdigit():
            raise ConfigError("listen", f"expected host:port, got {self.listen!r}")
        port = int(port_text)
        if not 0 < port < 65536:
            raise ConfigError("listen", f"port out of range: {port}")
        return host, port


_DURATION_RE = re.compile(r"^(\d+)\s*(s|m|h|d)?$")
_DURATION_UNITS = {"s": 1, "m": 60, "h": 3600, "d": 86400}


def parse_duration(text: str) -> datetime.timedelta:
    """Durations like "7d", "12h", "90m", or plain seconds."""
    match = _DURATION_RE.match(text.strip())
    if not match:
        raise ValueError(f"expected a duration like 7d or 12h, got {text!r}")
    amount, unit = match.groups()
    return datetime.timedelta(seconds=int(amount) * _DURATION_UNITS[unit or "s"])


def _positive_int(key: str, value: str) -> int:
    try:
        number = int(value)
    except ValueError:
        raise ConfigError(key, f"expected an integer, got {value!r}") from None
    if number < 1:
        raise ConfigError(key, "must be >= 1")
    return number


def _positive_float(key: str, value: str) -> float:
    try:
        number = float(value)
    except ValueError:
        raise ConfigError(key, f"expected a number, got {value!r}") from None
    if number <= 0:
        raise ConfigError(key, "must be positive")
    return number


def _apply_key(config: PortalConfig, key: str, value: str) -> PortalConfig:
    if key == "base_iri":
        return replace(config, base_iri=value.rstrip("/"))
    if key == "listen":
        return replace(config, listen=value)
    if key == "snapshot_path":
        return replace(config, snapshot_path=Path(value))
    if key == "locations":
        parts = tuple(p.strip() for p in value.split(",") if p.strip())
        if not parts:
            raise ConfigError("locations", "must list at least one location id")
        return replace(config, locations=parts)
    if key == "window_days":
        return replace(config, window_days=_positive_int(key, value))
    if key == "interval":
        try:
            interval = parse_duration(value)
        except ValueError as exc:
            raise ConfigError("interval", str(exc)) from None
        if interval < datetime.timedelta(hours=1):
            raise ConfigError("interval", "must be at least one hour")
        return replace(config, interval=interval)
    if key == "api_base":
        return replace(config, api_base=value.rstrip("/"))
    if key == "query_timeout":
        return replace(config, query_timeout=_positive_float(key, value))
    if key == "http_timeout":
        return replace(config, http_timeout=_positive_float(key, value))
    if key == "token":
        return replace(config, token=value)
    raise ConfigError(key, "unknown configuration key")


def parse_config_text(text: str, source: str = "<config>") -> PortalConfig:
    config = PortalConfig()
    for line_no, raw in enumerate(text.splitlines(), start=1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        key, sep, value = line.partition("=")
        if not sep:
            raise ConfigError(
                key.strip() or source, f"line {line_no}: expected key=value"
            )
        config = _apply_key(config, key.strip(), value.strip())
    return config


def load_config(
    path: Optional[Path] = None, env: Optional[Mapping[str, str]] = None
) -> PortalConfig:
    """Read the config file (optional) and apply environment overrides."""
    env = env if env is not None else {}
    if path is not None:
        path = Path(path)
        try:
            text = path.read_text(encoding="utf-8")
        except FileNotFoundError:
            raise ConfigError("config", f"file not found: {path}") from None
        config = parse_config_text(text, source=str(path))
    else:
        config = PortalConfig()
    if env.get("BASE_IRI"):
        config = replace(config, base_iri=env["BASE_IRI"].rstrip("/"))
    if env.get("PORT"):
        port = env["PORT"]
        if not port.isdigit():
            raise ConfigError("PORT", f"expected an integer, got {port!r}")
        host, _, _ = config.listen.rpartition(":")
        config = replace(config, listen=f"{host or '127.0.0.1'}:{port}")
    if env.get("NOAA_TOKEN"):
        config = replace(config, token=env["NOAA_TOKEN"])
    config.host_and_port()
    return config
