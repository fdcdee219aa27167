"""Sweep runner: scenario x (array, pointing, weather) x policy -> report files.

Report files are a pure function of the config. Wall-clock timings are written
to a separate ``timings.csv`` so the results files stay byte-identical across
reruns and worker counts.
"""

from __future__ import annotations

import csv
import io
import itertools
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

from .antenna import ArrayConfig
from .context import PRESETS, ThresholdConfig, WeatherContext, load_weather_snapshot
from .control import (
    DEFAULT_BRUTE_CAP,
    SearchSpaceTooLarge,
    baseline_exclusion_zone,
    baseline_in_threshold,
    brute_force_control,
    cat3s_control,
)
from .link_metrics import LinkEnv
from .propagation import BuildingIndex
from .scenario import GeneratorParams, PowerRange, Scenario, dumps_scenario, generate_synthetic_scenario, load_scenario

RESULTS_VERSION = 1
POLICIES = ("cat3s", "baseline1", "baseline2", "brute")
COLUMNS = (
    "array",
    "pointing_deg",
    "weather",
    "policy",
    "i_th_db",
    "aggregate_in_db",
    "active_bs_count",
    "total_capacity_bps_hz",
    "served_ues",
    "objective",
    "error",
)
NUMERIC = ("pointing_deg", "i_th_db", "aggregate_in_db", "active_bs_count", "total_capacity_bps_hz", "served_ues", "objective")


class ConfigError(ValueError):
    pass


@dataclass
class ExperimentConfig:
    policies: list[str] = field(default_factory=lambda: ["cat3s", "baseline1", "baseline2"])
    pointing_angles: list[float] = field(default_factory=lambda: [20.0, 30.0, 40.0, 50.0])
    arrays: list[str] = field(default_factory=lambda: ["4x4"])
    weather: list[str] = field(default_factory=lambda: ["sunny", "rainy"])
    scenario: str | None = None  # path to a scenario JSON; overrides the generator
    generator: dict = field(default_factory=dict)  # GeneratorParams overrides
    seed: int = 0
    out: str = "results"
    workers: int = 1
    brute_cap: int = DEFAULT_BRUTE_CAP
    thresholds: dict = field(default_factory=dict)  # sunny / rainy / override
    base_dir: str = "."  # relative paths in the config resolve against this

    def validate(self) -> None:
        if not self.policies:
            raise ConfigError("at least one policy required")
        bad = [p for p in self.policies if p not in POLICIES]
        if bad:
            raise ConfigError(f"unknown policies {bad}; choose from {list(POLICIES)}")
        if len(set(self.policies)) != len(self.policies):
            raise ConfigError("duplicate policy")
        for name in ("pointing_angles", "arrays", "weather"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must be a non-empty list")
        for a in self.pointing_angles:
            if isinstance(a, bool) or not isinstance(a, (int, float)) or not 0 <= a <= 90:
                raise ConfigError(f"pointing angle {a!r} outside [0, 90]")
        for a in self.arrays:
            try:
                ArrayConfig.parse(a)
            except (ValueError, TypeError, AttributeError) as exc:
                raise ConfigError(f"bad array config {a!r}: {exc}") from None
        if isinstance(self.seed, bool) or not isinstance(self.seed, int) or not 0 <= self.seed < 2**64:
            raise ConfigError("seed must be an unsigned 64-bit integer")
        if isinstance(self.workers, bool) or not isinstance(self.workers, int) or self.workers < 1:
            raise ConfigError("workers must be a positive integer")
        if not isinstance(self.generator, dict):
            raise ConfigError("generator must be an object")
        known = {f.name for f in fields(GeneratorParams)}
        extra = set(self.generator) - known
        if extra:
            raise ConfigError(f"unknown generator fields {sorted(extra)}")
        extra = set(self.thresholds) - {"sunny", "rainy", "override"}
        if extra:
            raise ConfigError(f"unknown threshold fields {sorted(extra)}")

    @classmethod
    def from_dict(cls, doc: dict, base_dir: str | Path = ".") -> "ExperimentConfig":
        if not isinstance(doc, dict):
            raise ConfigError("config must be a JSON object")
        known = {f.name for f in fields(cls)} - {"base_dir"}
        extra = set(doc) - known
        if extra:
            raise ConfigError(f"unknown config keys {sorted(extra)}")
        cfg = cls(**doc, base_dir=str(base_dir))
        cfg.validate()
        return cfg

    @classmethod
    def load(cls, path) -> "ExperimentConfig":
        path = Path(path)
        try:
            doc = json.loads(path.read_text())
        except (OSError, UnicodeDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from None
        except json.JSONDecodeError as exc:
            raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None
        return cls.from_dict(doc, base_dir=path.parent)

    def resolve(self, p: str) -> Path:
        path = Path(p)
        return path if path.is_absolute() else Path(self.base_dir) / path

    def threshold_config(self) -> ThresholdConfig:
        return ThresholdConfig(**self.thresholds)

    def generator_params(self) -> GeneratorParams:
        g = dict(self.generator)
        for key in ("building_height", "building_size"):
            if key in g:
                g[key] = tuple(g[key])
        if "power_range" in g:
            g["power_range"] = PowerRange(**g["power_range"])
        return GeneratorParams(**g)


def build_scenario(cfg: ExperimentConfig) -> Scenario:
    if cfg.scenario:
        return load_scenario(cfg.resolve(cfg.scenario))
    return generate_synthetic_scenario(cfg.generator_params(), cfg.seed)


def _weather(cfg: ExperimentConfig, name: str) -> tuple[str, WeatherContext]:
    thr = cfg.threshold_config()
    if name in PRESETS:
        return name, load_weather_snapshot(name, thr)
    path = cfg.resolve(name)
    return path.stem, load_weather_snapshot(path, thr)


@dataclass(frozen=True)
class SweepPoint:
    index: int
    array: str
    pointing_deg: float
    weather: str


def sweep_points(cfg: ExperimentConfig) -> list[SweepPoint]:
    combos = itertools.product(cfg.arrays, cfg.pointing_angles, cfg.weather)
    return [SweepPoint(i, a, float(p), w) for i, (a, p, w) in enumerate(combos)]


def _run_policy(env: LinkEnv, policy: str, cap: int):
    if policy == "cat3s":
        return cat3s_control(env)
    if policy == "baseline1":
        return baseline_exclusion_zone(env)
    if policy == "baseline2":
        return baseline_in_threshold(env)
    return brute_force_control(env, cap=cap)


def _error_text(exc: BaseException) -> str:
    if isinstance(exc, SearchSpaceTooLarge):
        return f"cap exceeded: {exc}"
    return f"{type(exc).__name__}: {exc}"


def run_point(cfg: ExperimentConfig, scenario: Scenario, point: SweepPoint) -> list[dict]:
    """All policies at one sweep point. Never raises; failures land in ``error``."""
    base = {"array": point.array, "pointing_deg": point.pointing_deg}
    try:
        label, weather = _weather(cfg, point.weather)
    except Exception as exc:  # noqa: BLE001 - isolate the point
        label, weather = Path(point.weather).stem, None
        err = _error_text(exc)
    out = []
    env = None
    if weather is not None:
        try:
            sc = scenario.with_array(ArrayConfig.parse(point.array)).with_pointing(point.pointing_deg)
            env = LinkEnv(sc, weather, _shared_index(scenario))
        except Exception as exc:  # noqa: BLE001
            err = _error_text(exc)
    for policy in cfg.policies:
        row = dict(base, weather=label, policy=policy, i_th_db=None if weather is None else weather.i_th)
        t0 = time.perf_counter()
        if env is None:
            row["error"] = err
            row["decision"] = None
        else:
            try:
                dec = _run_policy(env, policy, cfg.brute_cap)
                row.update(
                    aggregate_in_db=dec.achieved_in_db,
                    active_bs_count=dec.active_bs_count,
                    total_capacity_bps_hz=dec.total_capacity,
                    served_ues=dec.served_ues,
                    objective=dec.objective_value,
                    error="",
                    decision=dec.to_dict(),
                )
            except Exception as exc:  # noqa: BLE001
                row["error"] = _error_text(exc)
                row["decision"] = None
        row["runtime_ms"] = (time.perf_counter() - t0) * 1e3
        out.append(row)
    return out


_INDEX_CACHE: dict[int, BuildingIndex] = {}


def _shared_index(scenario: Scenario) -> BuildingIndex:
    # one building index per scenario object per process
    key = id(scenario.buildings)
    if key not in _INDEX_CACHE:
        _INDEX_CACHE.clear()
        _INDEX_CACHE[key] = BuildingIndex(scenario.buildings)
    return _INDEX_CACHE[key]


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        return f"{v:.6f}"
    return str(v)


def results_csv_text(rows: list[dict]) -> str:
    buf = io.StringIO()
    buf.write(f"# satcoex-results v{RESULTS_VERSION} columns={','.join(COLUMNS)}\n")
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(COLUMNS)
    for r in rows:
        w.writerow([_fmt(r.get(c)) for c in COLUMNS])
    return buf.getvalue()


def _json_safe(v):
    if isinstance(v, float) and not math.isfinite(v):
        return None
    if isinstance(v, dict):
        return {k: _json_safe(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [_json_safe(x) for x in v]
    return v


@dataclass
class ExperimentReport:
    rows: list[dict]
    out_dir: Path

    @property
    def n_errors(self) -> int:
        return sum(1 for r in self.rows if r.get("error"))

    @property
    def all_failed(self) -> bool:
        return bool(self.rows) and self.n_errors == len(self.rows)


def _point_worker(args):
    cfg, scenario, point = args
    return run_point(cfg, scenario, point)


def run_experiment(cfg: ExperimentConfig) -> ExperimentReport:
    cfg.validate()
    scenario = build_scenario(cfg)
    points = sweep_points(cfg)
    if cfg.workers > 1 and len(points) > 1:
        with ProcessPoolExecutor(max_workers=min(cfg.workers, len(points))) as pool:
            # map preserves submission order: the reduction is ordered by sweep index
            chunks = list(pool.map(_point_worker, [(cfg, scenario, p) for p in points]))
    else:
        chunks = [run_point(cfg, scenario, p) for p in points]
    rows = [r for chunk in chunks for r in chunk]
    out = Path(cfg.out)
    write_reports(rows, out, scenario)
    return ExperimentReport(rows, out)


def _decision_name(r: dict) -> str:
    return f"{r['array']}_el{r['pointing_deg']:g}_{r['weather']}_{r['policy']}.json"


def write_reports(rows: list[dict], out: Path, scenario: Scenario | None = None) -> None:
    out.mkdir(parents=True, exist_ok=True)
    (out / "results.csv").write_text(results_csv_text(rows))
    public = [{c: r.get(c) for c in COLUMNS} for r in rows]
    (out / "results.json").write_text(
        json.dumps({"version": RESULTS_VERSION, "columns": list(COLUMNS), "rows": _json_safe(public)}, indent=1, sort_keys=True)
        + "\n"
    )
    ddir = out / "decisions"
    ddir.mkdir(exist_ok=True)
    for r in rows:
        if r.get("decision") is not None:
            (ddir / _decision_name(r)).write_text(json.dumps(_json_safe(r["decision"]), indent=1, sort_keys=True) + "\n")
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(("array", "pointing_deg", "weather", "policy", "runtime_ms"))
    for r in rows:
        w.writerow([r["array"], _fmt(r["pointing_deg"]), r["weather"], r["policy"], f"{r['runtime_ms']:.3f}"])
    (out / "timings.csv").write_text(buf.getvalue())
    if scenario is not None:
        (out / "scenario.json").write_text(dumps_scenario(scenario))


# -- comparison -------------------------------------------------------------------


class CompareError(ValueError):
    def __init__(self, line: int, msg: str):
        super().__init__(f"line {line}: {msg}")
        self.line = line


@dataclass(frozen=True)
class PolicyDelta:
    array: str
    pointing_deg: float
    weather: str
    policy: str
    d_in_db: float
    d_active: int
    d_capacity: float


@dataclass
class CompareSummary:
    deltas: list[PolicyDelta]
    violations: list[tuple[str, float, str]]  # sweep points where cat3s exceeds its threshold

    def table(self) -> str:
        lines = [f"{'array':>6} {'elev':>5} {'weather':>7} {'policy':>10} {'dI/N dB':>9} {'dActive':>7} {'dCap':>10}"]
        for d in self.deltas:
            lines.append(
                f"{d.array:>6} {d.pointing_deg:5g} {d.weather:>7} {d.policy:>10} "
                f"{d.d_in_db:9.3f} {d.d_active:7d} {d.d_capacity:10.2f}"
            )
        for v in self.violations:
            lines.append(f"VIOLATION cat3s above I_th at array={v[0]} elev={v[1]:g} weather={v[2]}")
        return "\n".join(lines)


def read_results_csv(source) -> list[dict]:
    """Parse a results file written by :func:`results_csv_text`; errors carry the line number."""
    text = Path(source).read_text() if isinstance(source, (str, Path)) and "\n" not in str(source) else source
    if isinstance(text, bytes):
        text = text.decode("utf-8", errors="replace")
    rows = []
    header = None
    for lineno, line in enumerate(text.splitlines(), start=1):
        if not line.strip() or line.startswith("#"):
            continue
        try:
            cells = next(csv.reader([line]))
        except csv.Error as exc:
            raise CompareError(lineno, str(exc)) from None
        if header is None:
            if tuple(cells) != COLUMNS:
                raise CompareError(lineno, f"unexpected header {cells}")
            header = cells
            continue
        if len(cells) != len(COLUMNS):
            raise CompareError(lineno, f"expected {len(COLUMNS)} fields, got {len(cells)}")
        row = dict(zip(COLUMNS, cells))
        if not row["policy"]:
            raise CompareError(lineno, "empty policy")
        for c in NUMERIC:
            if row[c] == "":
                row[c] = None
                continue
            try:
                row[c] = float(row[c])
            except ValueError:
                raise CompareError(lineno, f"column {c}: not a number {row[c]!r}") from None
        if row["pointing_deg"] is None:
            raise CompareError(lineno, "missing pointing_deg")
        rows.append(row)
    if header is None:
        raise CompareError(1, "missing header row")
    return rows


def compare_policies(source) -> CompareSummary:
    rows = read_results_csv(source)
    points: dict[tuple, dict[str, dict]] = {}
    for r in rows:
        points.setdefault((r["array"], r["pointing_deg"], r["weather"]), {})[r["policy"]] = r
    deltas, violations = [], []
    for key, by_policy in points.items():
        ref = by_policy.get("cat3s")
        if ref is None or ref["error"] or ref["aggregate_in_db"] is None:
            continue
        if ref["i_th_db"] is not None and ref["aggregate_in_db"] > ref["i_th_db"]:
            violations.append(key)
        for policy, r in by_policy.items():
            if policy == "cat3s" or r["error"] or r["aggregate_in_db"] is None:
                continue
            deltas.append(
                PolicyDelta(
                    *key,
                    policy,
                    r["aggregate_in_db"] - ref["aggregate_in_db"],
                    int(r["active_bs_count"] - ref["active_bs_count"]),
                    r["total_capacity_bps_hz"] - ref["total_capacity_bps_hz"],
                )
            )
    return CompareSummary(deltas, violations)


def config_to_dict(cfg: ExperimentConfig) -> dict:
    d = asdict(cfg)
    d.pop("base_dir")
    return d


__all__ = [
    "COLUMNS",
    "CompareError",
    "CompareSummary",
    "ConfigError",
    "ExperimentConfig",
    "ExperimentReport",
    "compare_policies",
    "config_to_dict",
    "read_results_csv",
    "run_experiment",
    "sweep_points",
]
