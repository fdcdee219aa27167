"""Transmit beam gains from a planar array factor, and the earth-station receive pattern."""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

SPEED_OF_LIGHT = 299_792_458.0
DB_FLOOR = -200.0
LINEAR_FLOOR = 1e-20


def wavelength_m(freq_ghz: float) -> float:
    return SPEED_OF_LIGHT / (freq_ghz * 1e9)


def to_db(linear):
    """10*log10 with the -200 dB floor for anything <= 1e-20."""
    lin = np.asarray(linear, dtype=float)
    out = np.full(lin.shape, DB_FLOOR)
    ok = lin > LINEAR_FLOOR
    out[ok] = 10.0 * np.log10(lin[ok])
    return out if out.ndim else float(out)


@dataclass(frozen=True)
class ArrayConfig:
    """M x L planar array; element spacings in wavelengths."""

    rows: int = 4
    cols: int = 4
    dx: float = 0.5
    dy: float = 0.5
    wavelength: float = wavelength_m(12.45)

    def __post_init__(self):
        if self.rows < 1 or self.cols < 1:
            raise ValueError(f"array needs at least one row and column, got {self.rows}x{self.cols}")
        if self.dx <= 0 or self.dy <= 0:
            raise ValueError("element spacing must be positive")

    @property
    def n_elements(self) -> int:
        return self.rows * self.cols

    @classmethod
    def parse(cls, text: str, **kw) -> "ArrayConfig":
        """Build from strings like ``"4x16"``."""
        m, _, l = text.lower().partition("x")
        return cls(rows=int(m), cols=int(l), **kw)

    def label(self) -> str:
        return f"{self.rows}x{self.cols}"


@dataclass(frozen=True)
class BeamCodebook:
    entries: tuple[tuple[float, float], ...]

    def __post_init__(self):
        if not self.entries:
            raise ValueError("codebook must hold at least one beam")
        if len(set(self.entries)) != len(self.entries):
            raise ValueError("codebook entries must be distinct")

    def __len__(self) -> int:
        return len(self.entries)

    def as_array(self) -> np.ndarray:
        return np.asarray(self.entries, dtype=float)


@dataclass(frozen=True)
class Direction:
    theta: float
    phi: float

    def __post_init__(self):
        if not (0.0 <= self.theta <= math.pi):
            raise ValueError(f"theta {self.theta} outside [0, pi]")
        if not (-math.pi <= self.phi <= math.pi):
            raise ValueError(f"phi {self.phi} outside [-pi, pi]")


def _grid_shape(n: int) -> tuple[int, int]:
    gx = int(math.isqrt(n))
    while n % gx:
        gx -= 1
    return gx, n // gx


def build_codebook(cfg: ArrayConfig, n_beams: int = 64) -> BeamCodebook:
    """Uniform (beta_x, beta_y) phase grid over [-pi, pi)^2, row-major.

    A non-square count is split into the most square factor pair. A single
    beam is the broadside (0, 0) entry.
    """
    if n_beams <= 0:
        raise ValueError("n_beams must be positive")
    if n_beams == 1:
        return BeamCodebook(((0.0, 0.0),))
    gx, gy = _grid_shape(n_beams)
    bx = [-math.pi + 2 * math.pi * i / gx for i in range(gx)]
    by = [-math.pi + 2 * math.pi * i / gy for i in range(gy)]
    return BeamCodebook(tuple((a, b) for a in bx for b in by))


def _axis_factor(psi, n: int):
    half = np.sin(psi / 2.0)
    safe = np.abs(half) > 1e-10
    denom = np.where(safe, half, 1.0)
    val = np.sin(n * psi / 2.0) ** 2 / (n * denom**2)
    # removable singularity at psi = 0 (mod 2pi); cap at the Fejer-kernel peak
    return np.minimum(np.where(safe, val, float(n)), float(n))


def array_factor_uv(cfg: ArrayConfig, beta_x, beta_y, u, v):
    """Array factor from direction cosines u = sin(t)cos(p), v = sin(t)sin(p)."""
    psi_x = 2.0 * math.pi * cfg.dx * u + beta_x
    psi_y = 2.0 * math.pi * cfg.dy * v + beta_y
    return _axis_factor(psi_x, cfg.rows) * _axis_factor(psi_y, cfg.cols)


def array_factor(cfg: ArrayConfig, beam: tuple[float, float], direction: Direction) -> float:
    st = math.sin(direction.theta)
    u = st * math.cos(direction.phi)
    v = st * math.sin(direction.phi)
    return float(array_factor_uv(cfg, beam[0], beam[1], u, v))


def beam_gain_dbi(cfg: ArrayConfig, beam: tuple[float, float], direction: Direction) -> float:
    return to_db(array_factor(cfg, beam, direction))


def panel_frame(azimuth_deg: float, downtilt_deg: float) -> np.ndarray:
    """Rows are (x_hat, y_hat, normal) of a panel facing ``azimuth_deg``.

    Azimuth is counter-clockwise from east; positive downtilt points the
    normal below the horizon.
    """
    az = math.radians(azimuth_deg)
    el = -math.radians(downtilt_deg)
    normal = np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])
    x_hat = np.array([-math.sin(az), math.cos(az), 0.0])
    y_hat = np.cross(normal, x_hat)
    return np.vstack([x_hat, y_hat, normal])


def direction_in_frame(frame: np.ndarray, vec) -> Direction:
    """Spherical angles (theta from the normal) of a world vector in a panel frame."""
    vec = np.asarray(vec, dtype=float)
    vec = vec / np.linalg.norm(vec)
    x, y, z = frame @ vec
    return Direction(math.acos(max(-1.0, min(1.0, z))), math.atan2(y, x))


def codebook_gains_dbi(cfg: ArrayConfig, codebook: BeamCodebook, frame: np.ndarray, vectors) -> np.ndarray:
    """Gain (dBi) of every codebook beam toward every target vector.

    ``vectors`` has shape (P, 3); the result has shape (P, N).
    """
    vecs = np.atleast_2d(np.asarray(vectors, dtype=float))
    vecs = vecs / np.linalg.norm(vecs, axis=1, keepdims=True)
    local = vecs @ frame.T
    beta = codebook.as_array()
    af = array_factor_uv(cfg, beta[None, :, 0], beta[None, :, 1], local[:, 0:1], local[:, 1:2])
    return to_db(af)


# -- earth-station receive pattern ---------------------------------------------

SIDELOBE_FLOOR_DBI = -10.0


def sidelobe_envelope_dbi(angle_deg: float) -> float:
    return 32.0 - 25.0 * math.log10(angle_deg)


@lru_cache(maxsize=64)
def _mainlobe_edge(max_gain: float) -> tuple[float, float]:
    """(D/lambda, angle where the parabolic mainlobe meets the floored envelope)."""
    d_over_l = 10.0 ** ((max_gain - 7.7) / 20.0)
    coef = 2.5e-3 * d_over_l**2

    def gap(a):
        return max_gain - coef * a * a - max(sidelobe_envelope_dbi(a), SIDELOBE_FLOOR_DBI)

    grid = np.linspace(1e-3, 180.0, 18001)
    vals = np.array([gap(a) for a in grid])
    pos = np.nonzero(vals > 0)[0]
    if pos.size == 0:
        return d_over_l, 0.0
    i = pos[-1]
    if i == grid.size - 1:
        return d_over_l, 180.0
    lo, hi = grid[i], grid[i + 1]
    for _ in range(80):
        mid = 0.5 * (lo + hi)
        if gap(mid) > 0:
            lo = mid
        else:
            hi = mid
    return d_over_l, 0.5 * (lo + hi)


def fss_pattern_dbi(max_gain: float, off_axis_deg):
    """Parabolic mainlobe, then 32 - 25 log10(angle) down to a -10 dBi floor."""
    ang = np.abs(np.asarray(off_axis_deg, dtype=float))
    d_over_l, edge = _mainlobe_edge(float(max_gain))
    main = max_gain - 2.5e-3 * (d_over_l * ang) ** 2
    with np.errstate(divide="ignore"):
        env = 32.0 - 25.0 * np.log10(ang)
    side = np.minimum(max_gain, np.maximum(env, SIDELOBE_FLOOR_DBI))
    out = np.where(ang < edge, main, side)
    return out if out.ndim else float(out)


def fss_gain_dbi(fss, off_axis_angle: float) -> float:
    if not (0.0 <= off_axis_angle <= 180.0):
        raise ValueError(f"off-axis angle {off_axis_angle} outside [0, 180] degrees")
    return fss_pattern_dbi(fss.max_gain, off_axis_angle)
