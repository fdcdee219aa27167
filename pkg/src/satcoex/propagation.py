"""LOS/NLOS classification against building prisms and deterministic path loss."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .geometry import points_in_polygon
from .scenario import GeoPoint

RAIN_FREQ_RANGE_GHZ = (10.0, 100.0)


class LosClass(enum.IntEnum):
    NLOS = 0
    LOS = 1


@dataclass(frozen=True)
class ShadowFadingParams:
    sigma_los: float = 4.0
    sigma_nlos: float = 6.0
    seed: int = 0

    def __post_init__(self):
        if self.sigma_los < 0 or self.sigma_nlos < 0:
            raise ValueError("shadow-fading sigma must be >= 0")


NO_SHADOWING = ShadowFadingParams(0.0, 0.0, 0)


class BuildingIndex:
    """Flattened building edges for vectorised segment tests.

    Built once, then queried read-only (safe to share between workers).
    """

    def __init__(self, buildings):
        self.buildings = tuple(buildings)
        rings = [b.ring() for b in self.buildings]
        self.heights = np.array([b.height for b in self.buildings], dtype=float)
        if rings:
            self.bbox = np.array([[r[:, 0].min(), r[:, 1].min(), r[:, 0].max(), r[:, 1].max()] for r in rings])
            starts, ends, owner = [], [], []
            for i, r in enumerate(rings):
                starts.append(r)
                ends.append(np.roll(r, -1, axis=0))
                owner.append(np.full(len(r), i))
            self.a = np.vstack(starts)
            self.b = np.vstack(ends)
            self.owner = np.concatenate(owner)
        else:
            self.bbox = np.zeros((0, 4))
            self.a = self.b = np.zeros((0, 2))
            self.owner = np.zeros(0, dtype=int)
        self._rings = rings

    def __len__(self) -> int:
        return len(self.buildings)

    def blocked(self, p, q) -> bool:
        """True iff the 3D segment p->q passes below the roof of some building."""
        p = np.asarray(p, dtype=float)
        q = np.asarray(q, dtype=float)
        # canonical endpoint order keeps the test exactly symmetric
        if tuple(q) < tuple(p):
            p, q = q, p
        if not len(self.buildings):
            return False
        lo = np.minimum(p[:2], q[:2])
        hi = np.maximum(p[:2], q[:2])
        near = (
            (self.bbox[:, 0] <= hi[0])
            & (self.bbox[:, 2] >= lo[0])
            & (self.bbox[:, 1] <= hi[1])
            & (self.bbox[:, 3] >= lo[1])
        )
        if not near.any():
            return False
        cand = np.nonzero(near)[0]

        # endpoint sitting inside a footprint below the roof
        for i in cand:
            for pt in (p, q):
                if pt[2] < self.heights[i] and points_in_polygon(pt[0], pt[1], self._rings[i]):
                    return True

        sel = near[self.owner]
        a, b, own = self.a[sel], self.b[sel], self.owner[sel]
        d = q[:2] - p[:2]
        e = b - a
        denom = d[0] * e[:, 1] - d[1] * e[:, 0]
        w = a - p[:2]
        with np.errstate(divide="ignore", invalid="ignore"):
            t = (w[:, 0] * e[:, 1] - w[:, 1] * e[:, 0]) / denom
            u = (w[:, 0] * d[1] - w[:, 1] * d[0]) / denom
        hit = (denom != 0) & (t >= 0) & (t <= 1) & (u >= 0) & (u <= 1)
        if not hit.any():
            return False
        z = p[2] + t[hit] * (q[2] - p[2])
        return bool(np.any(z < self.heights[own[hit]]))


def _xyz(p) -> np.ndarray:
    return p.xyz() if isinstance(p, GeoPoint) else np.asarray(p, dtype=float)


def classify_los(tx, rx, buildings) -> LosClass:
    """NLOS iff the segment crosses a footprint edge under that building's height."""
    tx, rx = _xyz(tx), _xyz(rx)
    if np.array_equal(tx, rx):
        raise ValueError("transmitter and receiver coincide")
    index = buildings if isinstance(buildings, BuildingIndex) else BuildingIndex(buildings)
    return LosClass.NLOS if index.blocked(tx, rx) else LosClass.LOS


# -- path loss --------------------------------------------------------------------


def uma_los_db(d3d: float, freq_ghz: float) -> float:
    """3GPP UMa LOS, pre-breakpoint branch."""
    return 28.0 + 22.0 * math.log10(d3d) + 20.0 * math.log10(freq_ghz)


def uma_nlos_db(d3d: float, freq_ghz: float, h_ut: float = 1.5) -> float:
    nlos = 13.54 + 39.08 * math.log10(d3d) + 20.0 * math.log10(freq_ghz) - 0.6 * (h_ut - 1.5)
    return max(uma_los_db(d3d, freq_ghz), nlos)


def shadow_fading_db(sf: ShadowFadingParams, los: LosClass, link_id) -> float:
    """Zero-mean Gaussian term frozen per (seed, link_id)."""
    sigma = sf.sigma_los if los == LosClass.LOS else sf.sigma_nlos
    if sigma == 0.0:
        return 0.0
    key = [int(sf.seed) & (2**64 - 1)] + [int(v) for v in link_id]
    z = np.random.default_rng(np.random.SeedSequence(key)).standard_normal()
    return float(sigma * z)


def path_loss_db(d3d: float, freq: float, los: LosClass, sf: ShadowFadingParams, link_id, h_ut: float = 1.5) -> float:
    if not d3d > 0:
        raise ValueError(f"3D distance must be positive, got {d3d}")
    base = uma_los_db(d3d, freq) if los == LosClass.LOS else uma_nlos_db(d3d, freq, h_ut)
    return base + shadow_fading_db(sf, los, link_id)


# -- rain -------------------------------------------------------------------------


@dataclass(frozen=True)
class RainModel:
    """Cubic-in-frequency specific attenuation with rain-rate dependent coefficients."""

    rain_rate: float

    def __post_init__(self):
        if self.rain_rate < 0:
            raise ValueError("rain rate must be >= 0")

    @property
    def coefficients(self) -> tuple[float, float, float, float]:
        x = self.rain_rate
        a = -5.520e-12 * x**3 + 3.26e-9 * x**2 - 1.21e-7 * x - 6e-6
        b = 8e-10 * x**3 - 4.522e-7 * x**2 - 3.03e-5 * x + 0.001
        c = -5.71e-9 * x**3 + 6e-7 * x**2 + 8.707e-3 * x - 0.018
        d = -1.073e-7 * x**3 + 1.068e-4 * x**2 - 0.0598e-3 * x + 0.0442
        return a, b, c, d

    def raw_db_per_km(self, f: float) -> float:
        a, b, c, d = self.coefficients
        return a * f**3 + b * f**2 + c * f + d


def rain_attenuation_db_per_km(x: float, f: float) -> float:
    lo, hi = RAIN_FREQ_RANGE_GHZ
    if not lo < f < hi:
        raise ValueError(f"rain model valid for {lo}-{hi} GHz, got {f}")
    return max(0.0, RainModel(x).raw_db_per_km(f))


def path_loss_weather_db(d_km: float, base_pl: float, weather, freq: float | None = None) -> float:
    """Add rain attenuation over ``d_km`` when the weather is rainy.

    ``weather`` is a WeatherContext; ``freq`` defaults to 12.45 GHz.
    """
    if d_km < 0:
        raise ValueError("distance must be >= 0")
    if not weather.is_rainy:
        return base_pl
    a_rain = rain_attenuation_db_per_km(weather.rain_rate, 12.45 if freq is None else freq)
    return base_pl + a_rain * d_km
