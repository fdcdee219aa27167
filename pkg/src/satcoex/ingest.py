"""Readers for building footprints (GeoJSON) and cell-site lists (CSV).

Both parsers are total: arbitrary bytes either produce a result or raise
:class:`IngestError`. Per-feature / per-row problems do not abort the file;
they are collected in the returned ``errors`` list.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

from .geometry import FrameOrigin, polygon_is_simple, project
from .scenario import SECTOR_CENTERS, BaseStation, Building, GeoPoint, Sector, subarray_offsets

DEFAULT_BUILDING_HEIGHT = 25.0  # midpoint of the 10-40 m band
DEFAULT_SITE_HEIGHT = 25.0


class IngestError(ValueError):
    """The document as a whole could not be read."""


@dataclass(frozen=True)
class RecordError:
    index: int
    message: str

    def __str__(self) -> str:
        return f"[{self.index}] {self.message}"


@dataclass
class IngestResult:
    items: list = field(default_factory=list)
    errors: list[RecordError] = field(default_factory=list)

    def __iter__(self):
        return iter(self.items)

    def __len__(self) -> int:
        return len(self.items)


@dataclass(frozen=True)
class RawCellSite:
    lat: float
    lon: float
    height: float = DEFAULT_SITE_HEIGHT

    def __post_init__(self):
        if not (math.isfinite(self.lat) and abs(self.lat) <= 90.0):
            raise ValueError(f"latitude out of range: {self.lat}")
        if not (math.isfinite(self.lon) and abs(self.lon) <= 180.0):
            raise ValueError(f"longitude out of range: {self.lon}")
        if not (math.isfinite(self.height) and self.height > 0):
            raise ValueError(f"height must be positive: {self.height}")


def _origin(frame_origin) -> FrameOrigin:
    if isinstance(frame_origin, FrameOrigin):
        return frame_origin
    lat, lon = frame_origin
    return FrameOrigin(float(lat), float(lon))


def _decode(doc) -> str:
    if isinstance(doc, str):
        return doc
    try:
        return bytes(doc).decode("utf-8-sig")
    except UnicodeDecodeError as exc:
        raise IngestError(f"invalid UTF-8 at byte {exc.start}") from None


def _finite(v) -> float:
    if isinstance(v, bool) or not isinstance(v, (int, float)):
        raise ValueError(f"expected a number, got {type(v).__name__}")
    v = float(v)
    if not math.isfinite(v):
        raise ValueError("non-finite coordinate")
    return v


def _feature_building(feat, origin: FrameOrigin) -> Building:
    if not isinstance(feat, dict):
        raise ValueError("feature is not an object")
    geom = feat.get("geometry")
    if not isinstance(geom, dict):
        raise ValueError("missing geometry")
    if geom.get("type") != "Polygon":
        raise ValueError(f"unsupported geometry {geom.get('type')!r}, skipped")
    rings = geom.get("coordinates")
    if not isinstance(rings, list) or not rings or not isinstance(rings[0], list):
        raise ValueError("polygon has no exterior ring")
    pts = []
    for pos in rings[0]:
        if not isinstance(pos, list) or len(pos) < 2:
            raise ValueError("malformed position")
        lon, lat = _finite(pos[0]), _finite(pos[1])
        if abs(lat) > 90 or abs(lon) > 180:
            raise ValueError("position outside lat/lon range")
        x, y = project(origin, lat, lon)
        pts.append((round(x, 6), round(y, 6)))
    if len(pts) > 1 and pts[0] == pts[-1]:
        pts.pop()  # GeoJSON rings are closed
    if len(set(pts)) < 3:
        raise ValueError("degenerate polygon (< 3 vertices)")
    if not polygon_is_simple(pts):
        raise ValueError("self-intersecting polygon")

    props = feat.get("properties") or {}
    if not isinstance(props, dict):
        raise ValueError("properties must be an object")
    height = DEFAULT_BUILDING_HEIGHT
    if props.get("height") is not None:
        raw = props["height"]
        try:
            height = float(raw) if isinstance(raw, str) else _finite(raw)
        except ValueError:
            raise ValueError(f"bad height {raw!r}") from None
        if not (math.isfinite(height) and height > 0):
            raise ValueError(f"bad height {raw!r}")
    return Building(tuple(pts), height)


def parse_buildings_geojson(doc, frame_origin) -> IngestResult:
    """FeatureCollection of Polygon footprints -> buildings in the local frame.

    Coordinates are GeoJSON ``[lon, lat]``. Holes are ignored.
    """
    origin = _origin(frame_origin)
    text = _decode(doc)
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise IngestError(f"not JSON: {exc.msg} at line {exc.lineno} col {exc.colno}") from None
    except RecursionError:
        raise IngestError("JSON nesting too deep") from None
    if not isinstance(data, dict) or data.get("type") != "FeatureCollection":
        raise IngestError("expected a GeoJSON FeatureCollection")
    feats = data.get("features")
    if not isinstance(feats, list):
        raise IngestError("FeatureCollection.features must be a list")

    out = IngestResult()
    for i, feat in enumerate(feats):
        try:
            out.items.append(_feature_building(feat, origin))
        except (ValueError, TypeError, OverflowError) as exc:
            out.errors.append(RecordError(i, str(exc)))
    return out


def parse_cell_sites_csv(
    doc,
    frame_origin,
    nominal_power: float = 42.0,
    n_subarrays: int = 4,
    down_tilt: float = 10.0,
) -> IngestResult:
    """CSV with a ``lat,lon[,height]`` header -> three-sector base stations.

    Row indices in errors are 1-based data rows (header excluded).
    """
    origin = _origin(frame_origin)
    text = _decode(doc)
    if "\x00" in text:
        raise IngestError("NUL byte in CSV")
    reader = csv.reader(io.StringIO(text, newline=""))
    try:
        rows = list(reader)
    except csv.Error as exc:
        raise IngestError(f"CSV error at line {reader.line_num}: {exc}") from None
    if not rows:
        raise IngestError("empty document: header row required")
    header = [h.strip().lower() for h in rows[0]]
    if "lat" not in header or "lon" not in header:
        raise IngestError("header must contain lat and lon columns")
    i_lat, i_lon = header.index("lat"), header.index("lon")
    i_h = header.index("height") if "height" in header else None

    subs = subarray_offsets(n_subarrays)
    out = IngestResult()
    for n, row in enumerate(rows[1:], start=1):
        if not row or all(not c.strip() for c in row):
            continue
        try:
            if len(row) != len(header):
                raise ValueError(f"expected {len(header)} fields, got {len(row)}")
            h_raw = row[i_h].strip() if i_h is not None else ""
            site = RawCellSite(
                float(row[i_lat]),
                float(row[i_lon]),
                float(h_raw) if h_raw else DEFAULT_SITE_HEIGHT,
            )
        except (ValueError, OverflowError) as exc:
            out.errors.append(RecordError(n, str(exc)))
            continue
        x, y = project(origin, site.lat, site.lon)
        sectors = tuple(Sector(c, subs) for c in SECTOR_CENTERS)
        out.items.append(
            BaseStation(len(out.items), GeoPoint(round(x, 6), round(y, 6), 0.0), site.height, sectors, nominal_power, down_tilt)
        )
    return out
