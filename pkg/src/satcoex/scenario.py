"""World-state types, scenario validation, synthetic deployments and JSON I/O."""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field, replace
from pathlib import Path

import numpy as np

from .antenna import ArrayConfig, wavelength_m
from .geometry import polygon_is_simple

SECTOR_CENTERS = (0.0, 120.0, 240.0)
DEFAULT_SUBARRAYS = 4


def thermal_noise_dbm(bandwidth_mhz: float, noise_figure_db: float = 7.0) -> float:
    return -174.0 + 10.0 * math.log10(bandwidth_mhz * 1e6) + noise_figure_db


@dataclass(frozen=True)
class GeoPoint:
    x: float
    y: float
    z: float = 0.0

    def xyz(self) -> np.ndarray:
        return np.array([self.x, self.y, self.z], dtype=float)


@dataclass(frozen=True)
class UserEquipment:
    id: int
    position: GeoPoint


@dataclass(frozen=True)
class SubArray:
    """One RF-fed panel; its normal is the sector center plus ``azimuth_offset``."""

    azimuth_offset: float = 0.0


@dataclass(frozen=True)
class Sector:
    azimuth_center: float
    subarrays: tuple[SubArray, ...] = ()
    cochannel: bool = True
    ues: tuple[UserEquipment, ...] = ()


@dataclass(frozen=True)
class BaseStation:
    id: int
    position: GeoPoint
    height: float
    sectors: tuple[Sector, ...]
    nominal_power: float
    down_tilt: float = 10.0

    @property
    def antenna_point(self) -> np.ndarray:
        return np.array([self.position.x, self.position.y, self.position.z + self.height])


@dataclass(frozen=True)
class FssReceiver:
    position: GeoPoint
    boresight_azimuth: float = 180.0
    elevation_angle: float = 30.0
    max_gain: float = 34.0
    noise_power: float = thermal_noise_dbm(100.0)

    def boresight(self) -> np.ndarray:
        az = math.radians(self.boresight_azimuth)
        el = math.radians(self.elevation_angle)
        return np.array([math.cos(el) * math.cos(az), math.cos(el) * math.sin(az), math.sin(el)])


@dataclass(frozen=True)
class Building:
    footprint: tuple[tuple[float, float], ...]
    height: float

    def ring(self) -> np.ndarray:
        return np.asarray(self.footprint, dtype=float)


@dataclass(frozen=True)
class PowerRange:
    """Transmit-power offsets (dB) around each BS's nominal power."""

    min_offset: float = -2.0
    max_offset: float = 2.0
    step: float = 0.5

    def offsets(self) -> tuple[float, ...]:
        n = int(math.floor((self.max_offset - self.min_offset) / self.step + 1e-9)) + 1
        return tuple(round(self.min_offset + i * self.step, 12) for i in range(n))


@dataclass(frozen=True)
class Scenario:
    base_stations: tuple[BaseStation, ...]
    buildings: tuple[Building, ...]
    fss: FssReceiver
    carrier_frequency: float = 12.45
    bandwidth: float = 100.0
    coverage_radius: float = 1000.0
    power_range: PowerRange = PowerRange()
    antenna_config: ArrayConfig = ArrayConfig()
    n_beams: int = 64
    rate_qos: float = 0.5
    weight: float = 0.5
    ue_noise_power: float = thermal_noise_dbm(100.0)
    sigma_los: float = 4.0
    sigma_nlos: float = 6.0
    seed: int = 0
    rain_model: bool = True
    weather_ref: str | None = None

    @property
    def n_subarrays(self) -> int:
        if not self.base_stations:
            return 0
        return len(self.base_stations[0].sectors[0].subarrays)

    def with_pointing(self, elevation_deg: float) -> "Scenario":
        return replace(self, fss=replace(self.fss, elevation_angle=float(elevation_deg)))

    def with_array(self, cfg: ArrayConfig) -> "Scenario":
        return replace(self, antenna_config=replace(cfg, wavelength=wavelength_m(self.carrier_frequency)))


# -- validation -----------------------------------------------------------------


@dataclass(frozen=True)
class Violation:
    path: str
    message: str


@dataclass
class ValidationReport:
    violations: list[Violation] = field(default_factory=list)

    def add(self, path: str, message: str) -> None:
        self.violations.append(Violation(path, message))

    @property
    def ok(self) -> bool:
        return not self.violations

    def __bool__(self) -> bool:
        return bool(self.violations)

    def __len__(self) -> int:
        return len(self.violations)

    def messages(self) -> list[str]:
        return [f"{v.path}: {v.message}" for v in self.violations]


def _check_point(report: ValidationReport, path: str, p: GeoPoint) -> None:
    if not all(math.isfinite(c) for c in (p.x, p.y, p.z)):
        report.add(path, "coordinates must be finite")
    elif p.z < 0:
        report.add(path, "z must be >= 0")


def _sector_spans_partition(centers: list[float]) -> bool:
    base = sorted(c % 360.0 for c in centers)
    return all(math.isclose((base[i] - base[0]), 120.0 * i, abs_tol=1e-9) for i in range(3))


def validate_scenario(s: Scenario) -> ValidationReport:
    """Collect every invariant violation, each tagged with a path to the entity."""
    r = ValidationReport()
    pr = s.power_range
    if not pr.min_offset <= pr.max_offset:
        r.add("scenario.power_range", "min offset must not exceed max offset")
    if not pr.step > 0:
        r.add("scenario.power_range", "step must be > 0")
    if s.rain_model and not 10.0 < s.carrier_frequency < 100.0:
        r.add("scenario.carrier_frequency", "rain model valid only for 10-100 GHz")
    if not 0.0 < s.weight < 1.0:
        r.add("scenario.weight", "weight must lie in (0, 1)")
    if s.n_beams < 1:
        r.add("scenario.n_beams", "codebook needs at least one beam")
    if s.coverage_radius <= 0:
        r.add("scenario.coverage_radius", "must be positive")
    if s.sigma_los < 0 or s.sigma_nlos < 0:
        r.add("scenario.shadow", "shadow-fading sigmas must be >= 0")

    f = s.fss
    _check_point(r, "fss.position", f.position)
    if not 0.0 <= f.elevation_angle <= 90.0:
        r.add("fss.elevation_angle", "must lie in [0, 90] degrees")
    if not math.isfinite(f.noise_power):
        r.add("fss.noise_power", "must be finite")

    n_sub = None
    for i, bs in enumerate(s.base_stations):
        p = f"base_stations[{i}]"
        _check_point(r, f"{p}.position", bs.position)
        if not bs.height > 0:
            r.add(f"{p}.height", "must be > 0")
        if len(bs.sectors) != 3:
            r.add(f"{p}.sectors", f"exactly 3 sectors required, found {len(bs.sectors)}")
        elif not _sector_spans_partition([sec.azimuth_center for sec in bs.sectors]):
            r.add(f"{p}.sectors", "sector 120-degree spans must be disjoint")
        for j, sec in enumerate(bs.sectors):
            sp = f"{p}.sectors[{j}]"
            if len(sec.subarrays) < 1:
                r.add(f"{sp}.subarrays", "at least one sub-array required")
            if n_sub is None:
                n_sub = len(sec.subarrays)
            elif len(sec.subarrays) != n_sub:
                r.add(f"{sp}.subarrays", "all sectors must carry the same number of sub-arrays")
            if not isinstance(sec.cochannel, bool):
                r.add(f"{sp}.cochannel", "flag must be boolean")
            for u, ue in enumerate(sec.ues):
                up = f"{sp}.ues[{u}]"
                _check_point(r, f"{up}.position", ue.position)
                d = math.hypot(ue.position.x - bs.position.x, ue.position.y - bs.position.y)
                if d > s.coverage_radius + 1e-9:
                    r.add(up, "UE outside the coverage disc")

    for b, bld in enumerate(s.buildings):
        p = f"buildings[{b}]"
        if not polygon_is_simple(list(bld.footprint)):
            r.add(f"{p}.footprint", "polygon simple (non-self-intersecting) with >= 3 vertices")
        if not bld.height > 0:
            r.add(f"{p}.height", "must be > 0")
    return r


# -- synthetic generator ----------------------------------------------------------


@dataclass(frozen=True)
class GeneratorParams:
    """Statistics of the synthetic suburban deployment around one earth station."""

    n_bs: int = 33
    radius: float = 5000.0
    bs_height: float = 25.0
    ues_per_sector: int = 10
    coverage_radius: float = 1000.0
    min_ue_distance: float = 10.0
    ue_height: float = 1.5
    n_buildings: int = 250
    building_height: tuple[float, float] = (10.0, 40.0)
    building_size: tuple[float, float] = (10.0, 30.0)
    subarrays: int = DEFAULT_SUBARRAYS
    array: str = "4x4"
    n_beams: int = 64
    carrier_frequency: float = 12.45
    bandwidth: float = 100.0
    # -38 is read as a spectral density (dBm/Hz); total power scales with bandwidth
    nominal_psd_dbm_hz: float = -38.0
    down_tilt: float = 10.0
    fss_height: float = 5.0
    fss_max_gain: float = 34.0
    fss_azimuth: float = 180.0
    fss_elevation: float = 30.0
    noise_figure: float = 7.0
    power_range: PowerRange = PowerRange()
    rate_qos: float = 0.5
    weight: float = 0.5
    sigma_los: float = 4.0
    sigma_nlos: float = 6.0

    @property
    def nominal_power_dbm(self) -> float:
        return self.nominal_psd_dbm_hz + 10.0 * math.log10(self.bandwidth * 1e6)


def subarray_offsets(n: int) -> tuple[SubArray, ...]:
    """Panels spread evenly across the 120-degree sector."""
    return tuple(SubArray(round(-60.0 + 120.0 * (i + 0.5) / n, 9)) for i in range(n))


def _random_building(rng: np.random.Generator, cx, cy, p: GeneratorParams) -> Building:
    w, h = rng.uniform(*p.building_size, size=2)
    ang = rng.uniform(0.0, math.pi / 2)
    c, s = math.cos(ang), math.sin(ang)
    corners = [(-w / 2, -h / 2), (w / 2, -h / 2), (w / 2, h / 2), (-w / 2, h / 2)]
    ring = tuple((round(cx + c * x - s * y, 6), round(cy + s * x + c * y, 6)) for x, y in corners)
    return Building(ring, round(float(rng.uniform(*p.building_height)), 6))


def generate_synthetic_scenario(params: GeneratorParams, seed: int) -> Scenario:
    """Deterministic synthetic deployment: a pure function of (params, seed)."""
    p = params
    if p.n_bs < 0 or p.ues_per_sector < 0 or p.n_buildings < 0 or p.subarrays < 1:
        raise ValueError("generator counts must be non-negative (sub-arrays >= 1)")
    if p.n_bs > 0 and p.radius <= 0:
        raise ValueError("placement region has zero area")
    if p.ues_per_sector > 0 and p.coverage_radius <= p.min_ue_distance:
        raise ValueError("UE placement annulus has zero area")
    rng = np.random.default_rng(np.random.SeedSequence(int(seed) & (2**64 - 1)))
    cfg = ArrayConfig.parse(p.array, wavelength=wavelength_m(p.carrier_frequency))
    subs = subarray_offsets(p.subarrays)
    power = round(p.nominal_power_dbm, 9)

    base_stations = []
    ue_id = 0
    for k in range(p.n_bs):
        r = p.radius * math.sqrt(rng.uniform())
        a = rng.uniform(0.0, 2 * math.pi)
        pos = GeoPoint(round(r * math.cos(a), 6), round(r * math.sin(a), 6), 0.0)
        sectors = []
        for center in SECTOR_CENTERS:
            ues = []
            for _ in range(p.ues_per_sector):
                rr = math.sqrt(rng.uniform(p.min_ue_distance**2, p.coverage_radius**2))
                aa = math.radians(center + rng.uniform(-60.0, 60.0))
                ues.append(
                    UserEquipment(
                        ue_id,
                        GeoPoint(round(pos.x + rr * math.cos(aa), 6), round(pos.y + rr * math.sin(aa), 6), p.ue_height),
                    )
                )
                ue_id += 1
            sectors.append(Sector(center, subs, True, tuple(ues)))
        base_stations.append(BaseStation(k, pos, p.bs_height, tuple(sectors), power, p.down_tilt))

    buildings = []
    span = p.radius + p.coverage_radius
    for _ in range(p.n_buildings):
        r = span * math.sqrt(rng.uniform())
        a = rng.uniform(0.0, 2 * math.pi)
        buildings.append(_random_building(rng, r * math.cos(a), r * math.sin(a), p))

    fss = FssReceiver(
        GeoPoint(0.0, 0.0, p.fss_height),
        p.fss_azimuth,
        p.fss_elevation,
        p.fss_max_gain,
        round(thermal_noise_dbm(p.bandwidth, p.noise_figure), 9),
    )
    return Scenario(
        base_stations=tuple(base_stations),
        buildings=tuple(buildings),
        fss=fss,
        carrier_frequency=p.carrier_frequency,
        bandwidth=p.bandwidth,
        coverage_radius=p.coverage_radius,
        power_range=p.power_range,
        antenna_config=cfg,
        n_beams=p.n_beams,
        rate_qos=p.rate_qos,
        weight=p.weight,
        ue_noise_power=round(thermal_noise_dbm(p.bandwidth, p.noise_figure), 9),
        sigma_los=p.sigma_los,
        sigma_nlos=p.sigma_nlos,
        seed=int(seed),
    )


# -- JSON document ----------------------------------------------------------------

SCHEMA_VERSION = 1


def _pt(p: GeoPoint) -> list[float]:
    return [p.x, p.y, p.z]


def scenario_to_dict(s: Scenario) -> dict:
    cfg = s.antenna_config
    return {
        "scenario": {
            "schema_version": SCHEMA_VERSION,
            "carrier_frequency_ghz": s.carrier_frequency,
            "bandwidth_mhz": s.bandwidth,
            "coverage_radius_m": s.coverage_radius,
            "power_range_db": [s.power_range.min_offset, s.power_range.max_offset, s.power_range.step],
            "array": {"rows": cfg.rows, "cols": cfg.cols, "dx": cfg.dx, "dy": cfg.dy},
            "n_beams": s.n_beams,
            "rate_qos_bps_hz": s.rate_qos,
            "weight": s.weight,
            "ue_noise_power_dbm": s.ue_noise_power,
            "shadow_sigma_db": [s.sigma_los, s.sigma_nlos],
            "seed": s.seed,
            "rain_model": s.rain_model,
        },
        "base_stations": [
            {
                "id": bs.id,
                "position": _pt(bs.position),
                "height_m": bs.height,
                "nominal_power_dbm": bs.nominal_power,
                "down_tilt_deg": bs.down_tilt,
                "sectors": [
                    {
                        "azimuth_center_deg": sec.azimuth_center,
                        "subarray_offsets_deg": [sa.azimuth_offset for sa in sec.subarrays],
                        "cochannel": sec.cochannel,
                        "ues": [{"id": ue.id, "position": _pt(ue.position)} for ue in sec.ues],
                    }
                    for sec in bs.sectors
                ],
            }
            for bs in s.base_stations
        ],
        "buildings": [{"footprint": [list(v) for v in b.footprint], "height_m": b.height} for b in s.buildings],
        "fss": {
            "position": _pt(s.fss.position),
            "boresight_azimuth_deg": s.fss.boresight_azimuth,
            "elevation_angle_deg": s.fss.elevation_angle,
            "max_gain_dbi": s.fss.max_gain,
            "noise_power_dbm": s.fss.noise_power,
        },
        "weather_ref": s.weather_ref,
    }


def scenario_from_dict(doc: dict) -> Scenario:
    sc = doc["scenario"]
    arr = sc.get("array", {})
    freq = float(sc.get("carrier_frequency_ghz", 12.45))
    cfg = ArrayConfig(
        int(arr.get("rows", 4)),
        int(arr.get("cols", 4)),
        float(arr.get("dx", 0.5)),
        float(arr.get("dy", 0.5)),
        wavelength_m(freq),
    )
    pr = sc.get("power_range_db", [-2.0, 2.0, 0.5])
    bw = float(sc.get("bandwidth_mhz", 100.0))
    sig = sc.get("shadow_sigma_db", [4.0, 6.0])

    def pt(v):
        return GeoPoint(*(float(c) for c in v))

    stations = []
    for b in doc.get("base_stations", []):
        sectors = tuple(
            Sector(
                float(sec["azimuth_center_deg"]),
                tuple(SubArray(float(o)) for o in sec.get("subarray_offsets_deg", [0.0])),
                bool(sec.get("cochannel", True)),
                tuple(UserEquipment(int(u["id"]), pt(u["position"])) for u in sec.get("ues", [])),
            )
            for sec in b["sectors"]
        )
        stations.append(
            BaseStation(
                int(b["id"]),
                pt(b["position"]),
                float(b.get("height_m", 25.0)),
                sectors,
                float(b["nominal_power_dbm"]),
                float(b.get("down_tilt_deg", 10.0)),
            )
        )
    f = doc["fss"]
    fss = FssReceiver(
        pt(f["position"]),
        float(f.get("boresight_azimuth_deg", 180.0)),
        float(f.get("elevation_angle_deg", 30.0)),
        float(f.get("max_gain_dbi", 34.0)),
        float(f.get("noise_power_dbm", thermal_noise_dbm(bw))),
    )
    return Scenario(
        base_stations=tuple(stations),
        buildings=tuple(
            Building(tuple((float(x), float(y)) for x, y in b["footprint"]), float(b["height_m"]))
            for b in doc.get("buildings", [])
        ),
        fss=fss,
        carrier_frequency=freq,
        bandwidth=bw,
        coverage_radius=float(sc.get("coverage_radius_m", 1000.0)),
        power_range=PowerRange(*(float(v) for v in pr)),
        antenna_config=cfg,
        n_beams=int(sc.get("n_beams", 64)),
        rate_qos=float(sc.get("rate_qos_bps_hz", 0.5)),
        weight=float(sc.get("weight", 0.5)),
        ue_noise_power=float(sc.get("ue_noise_power_dbm", thermal_noise_dbm(bw))),
        sigma_los=float(sig[0]),
        sigma_nlos=float(sig[1]),
        seed=int(sc.get("seed", 0)),
        rain_model=bool(sc.get("rain_model", True)),
        weather_ref=doc.get("weather_ref"),
    )


def dumps_scenario(s: Scenario) -> str:
    return json.dumps(scenario_to_dict(s), indent=1, sort_keys=True) + "\n"


def save_scenario(s: Scenario, path) -> None:
    Path(path).write_text(dumps_scenario(s), encoding="utf-8")


def load_scenario(path) -> Scenario:
    return scenario_from_dict(json.loads(Path(path).read_text(encoding="utf-8")))
