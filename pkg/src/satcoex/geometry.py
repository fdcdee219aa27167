"""Planar geometry helpers: local projection and polygon predicates."""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

EARTH_RADIUS_M = 6_371_008.8


@dataclass(frozen=True)
class FrameOrigin:
    """Geodetic anchor of the local east/north frame (degrees)."""

    lat: float
    lon: float


def project(origin: FrameOrigin, lat: float, lon: float) -> tuple[float, float]:
    """Equirectangular projection to local (east, north) meters."""
    k = math.radians(1.0) * EARTH_RADIUS_M
    x = (lon - origin.lon) * k * math.cos(math.radians(origin.lat))
    y = (lat - origin.lat) * k
    return x, y


def unproject(origin: FrameOrigin, x: float, y: float) -> tuple[float, float]:
    k = math.radians(1.0) * EARTH_RADIUS_M
    lat = origin.lat + y / k
    lon = origin.lon + x / (k * math.cos(math.radians(origin.lat)))
    return lat, lon


def _orient(ax, ay, bx, by, cx, cy) -> float:
    return (bx - ax) * (cy - ay) - (by - ay) * (cx - ax)


def _on_segment(ax, ay, bx, by, px, py) -> bool:
    return min(ax, bx) <= px <= max(ax, bx) and min(ay, by) <= py <= max(ay, by)


def segments_intersect(p1, p2, q1, q2) -> bool:
    """Closed-segment intersection test (touching counts)."""
    d1 = _orient(*q1, *q2, *p1)
    d2 = _orient(*q1, *q2, *p2)
    d3 = _orient(*p1, *p2, *q1)
    d4 = _orient(*p1, *p2, *q2)
    if ((d1 > 0 and d2 < 0) or (d1 < 0 and d2 > 0)) and ((d3 > 0 and d4 < 0) or (d3 < 0 and d4 > 0)):
        return True
    if d1 == 0 and _on_segment(*q1, *q2, *p1):
        return True
    if d2 == 0 and _on_segment(*q1, *q2, *p2):
        return True
    if d3 == 0 and _on_segment(*p1, *p2, *q1):
        return True
    if d4 == 0 and _on_segment(*p1, *p2, *q2):
        return True
    return False


def polygon_is_simple(vertices: list[tuple[float, float]]) -> bool:
    """True for a ring of >= 3 distinct vertices whose non-adjacent edges never meet.

    The ring is implicitly closed; a repeated closing vertex is not expected.
    """
    n = len(vertices)
    if n < 3:
        return False
    if len(set(vertices)) != n:
        return False
    edges = [(vertices[i], vertices[(i + 1) % n]) for i in range(n)]
    for i in range(n):
        for j in range(i + 1, n):
            if j == i + 1 or (i == 0 and j == n - 1):
                continue
            if segments_intersect(*edges[i], *edges[j]):
                return False
    # zero-area rings (all collinear) are degenerate
    area2 = sum(x0 * y1 - x1 * y0 for (x0, y0), (x1, y1) in edges)
    return area2 != 0.0


def points_in_polygon(px: np.ndarray, py: np.ndarray, ring: np.ndarray) -> np.ndarray:
    """Even-odd ray casting for many points against one ring of shape (n, 2)."""
    px = np.asarray(px, dtype=float)
    py = np.asarray(py, dtype=float)
    inside = np.zeros(np.broadcast(px, py).shape, dtype=bool)
    x0, y0 = ring[:, 0], ring[:, 1]
    x1, y1 = np.roll(x0, -1), np.roll(y0, -1)
    for ax, ay, bx, by in zip(x0, y0, x1, y1):
        cond = (ay > py) != (by > py)
        with np.errstate(divide="ignore", invalid="ignore"):
            xcross = ax + (py - ay) * (bx - ax) / (by - ay)
        inside ^= cond & (px < xcross)
    return inside
