"""Weather context acquisition and the weather-to-I/N-threshold mapping."""

from __future__ import annotations

import enum
import json
import math
import urllib.request
from dataclasses import dataclass
from importlib import resources
from pathlib import Path


class Condition(str, enum.Enum):
    SUNNY = "Sunny"
    RAINY = "Rainy"


class WeatherParseError(ValueError):
    def __init__(self, msg: str, offset: int):
        super().__init__(f"{msg} (byte offset {offset})")
        self.offset = offset


class WeatherValidationError(ValueError):
    def __init__(self, field: str, msg: str):
        super().__init__(f"{field}: {msg}")
        self.field = field


@dataclass(frozen=True)
class ThresholdConfig:
    sunny: float = -8.5
    rainy: float = -12.0
    override: float | None = None


DEFAULT_THRESHOLDS = ThresholdConfig()


@dataclass(frozen=True)
class WeatherContext:
    condition: Condition
    rain_rate: float
    i_th: float
    timestamp: int = 0

    def __post_init__(self):
        if self.condition == Condition.SUNNY and self.rain_rate != 0:
            raise WeatherValidationError("rain.1h", "sunny weather must have zero rain rate")
        if self.condition == Condition.RAINY and not self.rain_rate > 0:
            raise WeatherValidationError("rain.1h", "rainy weather needs a positive rain rate")
        if not math.isfinite(self.i_th):
            raise WeatherValidationError("i_th", "threshold must be finite")

    @property
    def is_rainy(self) -> bool:
        return self.condition == Condition.RAINY

    @property
    def label(self) -> str:
        return self.condition.value.lower()

    @classmethod
    def sunny(cls, thresholds: ThresholdConfig = DEFAULT_THRESHOLDS, timestamp: int = 0) -> "WeatherContext":
        return cls(Condition.SUNNY, 0.0, _threshold(Condition.SUNNY, thresholds), timestamp)

    @classmethod
    def rainy(
        cls, rain_rate: float = 25.0, thresholds: ThresholdConfig = DEFAULT_THRESHOLDS, timestamp: int = 0
    ) -> "WeatherContext":
        return cls(Condition.RAINY, float(rain_rate), _threshold(Condition.RAINY, thresholds), timestamp)


def _threshold(cond: Condition, cfg: ThresholdConfig) -> float:
    if cfg.override is not None:
        return float(cfg.override)
    return cfg.rainy if cond == Condition.RAINY else cfg.sunny


def select_interference_threshold(w: WeatherContext, cfg: ThresholdConfig = DEFAULT_THRESHOLDS) -> float:
    return _threshold(w.condition, cfg)


def _number(val, field: str) -> float:
    if isinstance(val, bool) or not isinstance(val, (int, float)):
        raise WeatherValidationError(field, f"expected a number, got {type(val).__name__}")
    if not math.isfinite(val):
        raise WeatherValidationError(field, "must be finite")
    return float(val)


def parse_weather_snapshot(doc: bytes | str, thresholds: ThresholdConfig = DEFAULT_THRESHOLDS) -> WeatherContext:
    """Validate a snapshot document: ``{"condition"?, "rain": {"1h": mm/h}, "dt": int}``."""
    try:
        text = doc.decode("utf-8") if isinstance(doc, bytes) else doc
    except UnicodeDecodeError as exc:
        raise WeatherParseError("invalid UTF-8", exc.start) from None
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise WeatherParseError(exc.msg, len(text[: exc.pos].encode("utf-8"))) from None
    if not isinstance(data, dict):
        raise WeatherValidationError("$", "snapshot must be a JSON object")

    cond_str = data.get("condition")
    if cond_str is not None and not isinstance(cond_str, str):
        raise WeatherValidationError("condition", "must be a string")
    rain = data.get("rain")
    if rain is None:
        if cond_str is not None and cond_str.strip().lower() in ("rain", "rainy"):
            raise WeatherValidationError("rain.1h", "missing for a rainy condition")
        rate = 0.0
    else:
        if not isinstance(rain, dict) or "1h" not in rain:
            raise WeatherValidationError("rain.1h", "missing")
        rate = _number(rain["1h"], "rain.1h")
        if rate < 0:
            raise WeatherValidationError("rain.1h", "rain rate must be >= 0")

    if "dt" not in data:
        raise WeatherValidationError("dt", "missing")
    dt = data["dt"]
    if isinstance(dt, bool) or not isinstance(dt, int):
        raise WeatherValidationError("dt", "must be an integer timestamp")

    cond = Condition.RAINY if rate > 0 else Condition.SUNNY
    return WeatherContext(cond, rate, _threshold(cond, thresholds), dt)


class SnapshotProvider:
    """Anything with ``fetch() -> bytes`` returning one snapshot document."""

    def fetch(self) -> bytes:  # pragma: no cover - interface
        raise NotImplementedError


class ReplayProvider(SnapshotProvider):
    """Replays recorded snapshots in order, cycling at the end."""

    def __init__(self, documents):
        self._docs = [Path(d).read_bytes() if isinstance(d, (str, Path)) else bytes(d) for d in documents]
        if not self._docs:
            raise ValueError("replay provider needs at least one snapshot")
        self._i = 0

    def fetch(self) -> bytes:
        doc = self._docs[self._i % len(self._docs)]
        self._i += 1
        return doc


class HttpProvider(SnapshotProvider):
    """GET a URL that serves the snapshot schema. Optional; never used by tests."""

    def __init__(self, url: str, timeout: float = 10.0):
        self.url = url
        self.timeout = timeout

    def fetch(self) -> bytes:
        with urllib.request.urlopen(self.url, timeout=self.timeout) as resp:
            return resp.read()


PRESETS = ("sunny", "rainy")


def preset_bytes(name: str) -> bytes:
    return resources.files("satcoex").joinpath("presets", f"{name}.json").read_bytes()


def load_weather_snapshot(source, thresholds: ThresholdConfig = DEFAULT_THRESHOLDS) -> WeatherContext:
    """Accepts raw bytes/str, a provider, a preset name, or a file path."""
    if isinstance(source, SnapshotProvider):
        return parse_weather_snapshot(source.fetch(), thresholds)
    if isinstance(source, bytes):
        return parse_weather_snapshot(source, thresholds)
    if isinstance(source, Path) or (isinstance(source, str) and not source.lstrip().startswith("{")):
        if str(source) in PRESETS:
            return parse_weather_snapshot(preset_bytes(str(source)), thresholds)
        return parse_weather_snapshot(Path(source).read_bytes(), thresholds)
    return parse_weather_snapshot(source, thresholds)
