"""BS activation / beam / power control: greedy controller, exact oracle, baselines."""

from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from .link_metrics import LinkEnv, NetworkState, in_ratio_db

RHO_DENOM_FLOOR = 1e-20
DEFAULT_BRUTE_CAP = 10**7


class SearchSpaceTooLarge(ValueError):
    pass


@dataclass(frozen=True)
class CandidateScore:
    k: int
    j: int
    m: int
    n: int
    rho: float

    def __post_init__(self):
        if not (self.rho >= 0 and math.isfinite(self.rho)):
            raise ValueError(f"priority score must be finite and >= 0, got {self.rho}")

    @property
    def key(self):
        return (-self.rho, self.k, self.j, self.m, self.n)


@dataclass(frozen=True)
class ControlDecision:
    policy: str
    state: NetworkState
    objective_value: float
    achieved_in_db: float
    total_capacity: float
    served_ues: int
    i_th: float
    iterations: tuple[int, int] = (0, 0)
    selection_trace: tuple[tuple[float, ...], ...] = ()

    @property
    def active_bs_count(self) -> int:
        return self.state.active_count()

    def to_dict(self) -> dict:
        return {
            "policy": self.policy,
            "objective_value": self.objective_value,
            "aggregate_in_db": self.achieved_in_db,
            "i_th_db": self.i_th,
            "total_capacity_bps_hz": self.total_capacity,
            "served_ues": self.served_ues,
            "active_bs_count": self.active_bs_count,
            "iterations": {"outer": self.iterations[0], "inner": self.iterations[1]},
            "state": self.state.to_dict(),
        }


def evaluate_objective(env: LinkEnv, state: NetworkState, w: float | None = None) -> float:
    """(1 - w) * total capacity + w * served UEs over active BSs."""
    w = env.scenario.weight if w is None else w
    cap = 0.0
    served = 0
    for k in range(env.K):
        if state.active[k]:
            cap += env.bs_capacity(k, state)
            served += env.bs_served(k, state)
    return (1.0 - w) * cap + w * served


def _finish(env, state, policy, w, i_th, iterations=(0, 0), trace=()) -> ControlDecision:
    return ControlDecision(
        policy=policy,
        state=state,
        objective_value=evaluate_objective(env, state, w),
        achieved_in_db=env.aggregate_in_db(state),
        total_capacity=env.total_capacity(state),
        served_ues=env.served_ues(state),
        i_th=i_th,
        iterations=iterations,
        selection_trace=tuple(trace),
    )


# -- constraints --------------------------------------------------------------------


@dataclass
class ConstraintReport:
    achieved_in_db: float
    i_th: float
    c2_failures: list[tuple[int, int]] = field(default_factory=list)
    c3_failures: list[int] = field(default_factory=list)
    c4_failures: list[tuple[int, int]] = field(default_factory=list)

    @property
    def c1(self) -> bool:
        return self.achieved_in_db <= self.i_th

    @property
    def c1_excess_db(self) -> float:
        return max(0.0, self.achieved_in_db - self.i_th)

    @property
    def c2(self) -> bool:
        return not self.c2_failures

    @property
    def c3(self) -> bool:
        return not self.c3_failures

    @property
    def c4(self) -> bool:
        return not self.c4_failures

    @property
    def ok(self) -> bool:
        return self.c1 and self.c2 and self.c3 and self.c4


def check_constraints(env: LinkEnv, state: NetworkState, i_th: float | None = None) -> ConstraintReport:
    """C1 aggregate I/N, C2 per-beam rate QoS, C3 power cap, C4 one beam per sector."""
    i_th = env.weather.i_th if i_th is None else i_th
    rep = ConstraintReport(env.aggregate_in_db(state), i_th)
    r_th = env.scenario.rate_qos
    p_max = env.p_max
    for k in range(env.K):
        if not state.active[k]:
            if any(state.beams[k]) or state.powers[k] is not None:
                rep.c4_failures.extend((k, j) for j in range(3) if state.beams[k][j])
            continue
        p = state.powers[k]
        if p is None or p > p_max[k] + 1e-9:
            rep.c3_failures.append(k)
            continue
        for j in range(3):
            sel = state.beams[k][j]
            if len(sel) > 1:
                rep.c4_failures.append((k, j))
            for beam in sel:
                rates = env.beam_ue_rates(k, j, beam, p)
                if rates.size and rates.min() < r_th:
                    rep.c2_failures.append((k, j))
                    break
    return rep


# -- QoS power floor -------------------------------------------------------------------


def _qos_beams(env: LinkEnv, k: int, j: int, power: float) -> list[tuple[tuple[int, int], np.ndarray]]:
    """Candidate beams of sector j whose every assigned UE meets the rate floor."""
    r_th = env.scenario.rate_qos
    out = []
    for beam in env.candidate_beams(k, j):
        rates = env.beam_ue_rates(k, j, beam, power)
        if rates.min() >= r_th:
            out.append((beam, rates))
    return out


def min_power_index(env: LinkEnv, k: int) -> int | None:
    grid = env.power_grid(k)
    bs = env.scenario.base_stations[k]
    for i, p in enumerate(grid):
        if all(not bs.sectors[j].ues or _qos_beams(env, k, j, p) for j in range(3)):
            return i
    return None


def min_power_for_qos(env: LinkEnv, k: int) -> float | None:
    """Lowest grid power at which every populated sector has a QoS-feasible beam.

    None means infeasible even at the power cap (the BS stays off).
    """
    i = min_power_index(env, k)
    return None if i is None else env.power_grid(k)[i]


def priority_score(capacity_sum: float, n_served: int, interference_dbm: float | None, w: float) -> float:
    """Utility over linear interference; ``None`` interference means the sector is not co-channel."""
    lin = 0.0 if interference_dbm is None else 10.0 ** (interference_dbm / 10.0)
    return ((1.0 - w) * capacity_sum + w * n_served) / max(lin, RHO_DENOM_FLOOR)


def _scores(env: LinkEnv, bss, powers: dict[int, float], w: float) -> list[CandidateScore]:
    out = []
    for k in bss:
        p = powers[k]
        for j in range(3):
            for beam, rates in _qos_beams(env, k, j, p):
                level = env.sector_level_dbm(k, j, beam, p) if env.cochannel[k, j] else None
                rho = priority_score(float(rates.sum()), int(rates.size), level, w)
                out.append(CandidateScore(k, j, beam[0], beam[1], rho))
    out.sort(key=lambda c: c.key)
    return out


# -- greedy controller -----------------------------------------------------------------


def cat3s_control(env: LinkEnv, i_th: float | None = None, w: float | None = None) -> ControlDecision:
    """Greedy beam-domain inner loop inside a power-domain outer loop.

    The first outer pass fixes the active set at the common minimum QoS
    power; later passes raise power one grid step at a time and re-pick
    beams, committing a change only if the aggregate I/N stays within
    ``i_th``. The inner loop stops at the first candidate that would break
    the threshold.
    """
    i_th = env.weather.i_th if i_th is None else i_th
    w = env.scenario.weight if w is None else w
    K = env.K
    min_idx = {k: min_power_index(env, k) for k in range(K)}
    operating = [k for k in range(K) if min_idx[k] is not None]
    if not operating:
        return _finish(env, NetworkState.all_off(K), "cat3s", w, i_th)

    start = max(min_idx[k] for k in operating)
    n_levels = len(env.power_offsets)
    active = [False] * K
    rows: list[tuple] = [((), (), ())] * K
    powers: list[float | None] = [None] * K
    contrib = [0.0] * K
    noise = env.fss_noise
    outer = inner_total = 0
    trace = []

    for level in range(start, n_levels):
        outer += 1
        first = level == start
        pool = operating if first else [k for k in range(K) if active[k]]
        target = {k: env.power_grid(k)[level] for k in pool}
        open_sectors = {k: {0, 1, 2} for k in pool}
        changes = 0
        picked = []
        for cand in _scores(env, pool, target, w):
            k, j = cand.k, cand.j
            if k not in open_sectors or j not in open_sectors[k]:
                continue
            row = list(rows[k])
            row[j] = ((cand.m, cand.n),)
            row = tuple(row)
            trial = env.bs_mw(k, target[k], row)
            total = 0.0
            for kk in range(K):
                total += trial if kk == k else contrib[kk]
            if in_ratio_db(total, noise) > i_th:
                break
            rows[k] = row
            powers[k] = target[k]
            active[k] = True
            contrib[k] = trial
            open_sectors[k].discard(j)
            if not open_sectors[k]:
                del open_sectors[k]
            changes += 1
            picked.append(cand.rho)
            if not open_sectors:
                break
        inner_total += changes
        trace.append(tuple(picked))
        if changes == 0:
            break

    state = NetworkState(
        tuple(active),
        tuple(rows[k] if active[k] else ((), (), ()) for k in range(K)),
        tuple(powers[k] if active[k] else None for k in range(K)),
    )
    return _finish(env, state, "cat3s", w, i_th, (outer, inner_total), trace)


# -- exhaustive oracle ----------------------------------------------------------------------


def _bs_options(env: LinkEnv, k: int, w: float):
    """Every C2/C4-respecting configuration of one BS: (label, value, interference mW).

    Sectors only take beams that serve someone; an unserving beam adds
    interference and no utility, so dropping it never loses the optimum.
    """
    opts = [(None, 0.0, 0.0)]
    for i, p in enumerate(env.power_grid(k)):
        per_sector = []
        for j in range(3):
            choices = [(None, 0.0, 0)]
            for beam, rates in _qos_beams(env, k, j, p):
                choices.append((beam, float(rates.sum()), int(rates.size)))
            per_sector.append(choices)
        for combo in itertools.product(*per_sector):
            if all(c[0] is None for c in combo):
                continue
            row = tuple(((c[0],) if c[0] is not None else ()) for c in combo)
            cap = sum(c[1] for c in combo)
            served = sum(c[2] for c in combo)
            opts.append(((p, row), (1.0 - w) * cap + w * served, env.bs_mw(k, p, row)))
    return opts


def brute_force_control(
    env: LinkEnv, i_th: float | None = None, w: float | None = None, cap: int = DEFAULT_BRUTE_CAP
) -> ControlDecision:
    """Exact argmax of the weighted objective over the discrete grid (tiny instances only)."""
    i_th = env.weather.i_th if i_th is None else i_th
    w = env.scenario.weight if w is None else w
    K = env.K
    if K == 0:
        return _finish(env, NetworkState.all_off(0), "brute", w, i_th)
    # cheap size bound before materialising the options
    bound = 1
    for k in range(K):
        per_power = 1
        for j in range(3):
            per_power *= 1 + len(env.candidate_beams(k, j))
        bound *= 1 + len(env.power_offsets) * (per_power - 1)
        if bound > cap:
            raise SearchSpaceTooLarge(f"search space exceeds cap {cap}")
    options = [_bs_options(env, k, w) for k in range(K)]
    size = math.prod(len(o) for o in options)
    if size > cap:
        raise SearchSpaceTooLarge(f"search space {size} exceeds cap {cap}")

    value = np.zeros(1)
    mw = np.zeros(1)
    for opts in options:
        value = np.add.outer(value, np.array([o[1] for o in opts])).ravel()
        mw = np.add.outer(mw, np.array([o[2] for o in opts])).ravel()
    with np.errstate(divide="ignore"):
        ratio = np.where(mw > 0, 10.0 * np.log10(np.where(mw > 0, mw, 1.0)) - env.fss_noise, -np.inf)
    masked = np.where(ratio <= i_th, value, -np.inf)
    shape = [len(o) for o in options]

    while True:
        flat = int(np.argmax(masked))  # first maximum = lexicographically smallest state
        idx = np.unravel_index(flat, shape)
        assignment = {}
        for k, i in enumerate(idx):
            label = options[k][i][0]
            if label is not None:
                p, row = label
                assignment[k] = (p, {j: row[j][0] for j in range(3) if row[j]})
        state = NetworkState.build(K, assignment)
        if env.aggregate_in_db(state) <= i_th or flat == 0:
            break
        masked[flat] = -np.inf
    return _finish(env, state, "brute", w, i_th)


# -- baselines ------------------------------------------------------------------------------


def conventional_row(env: LinkEnv, k: int, power: float) -> tuple:
    """Per sector, the serving beam with the highest capacity (interference-blind)."""
    row = []
    for j in range(3):
        best, best_cap = None, -1.0
        for beam in env.candidate_beams(k, j):
            c = float(env.beam_ue_rates(k, j, beam, power).sum())
            if c > best_cap:
                best, best_cap = beam, c
        row.append((best,) if best is not None else ())
    return tuple(row)


def individual_in_db(env: LinkEnv, k: int) -> tuple[float, tuple]:
    """I/N of BS k alone at nominal power with conventional beams."""
    p = float(env.nominal[k])
    row = conventional_row(env, k, p)
    return in_ratio_db(env.bs_mw(k, p, row), env.fss_noise), row


def _baseline(env, policy, keep, i_th, w) -> ControlDecision:
    K = env.K
    assignment = {}
    for k in range(K):
        ind, row = individual_in_db(env, k)
        if any(row) and keep(k, ind):
            assignment[k] = (float(env.nominal[k]), {j: row[j][0] for j in range(3) if row[j]})
    return _finish(env, NetworkState.build(K, assignment), policy, w, i_th)


def baseline_exclusion_zone(
    env: LinkEnv, radius: float = 3000.0, i_th: float | None = None, w: float | None = None
) -> ControlDecision:
    """Off inside ``radius``; outside, off if the BS alone exceeds the weather threshold."""
    if not radius > 0:
        raise ValueError("exclusion radius must be positive")
    i_th = env.weather.i_th if i_th is None else i_th
    w = env.scenario.weight if w is None else w
    fss = env.scenario.fss.position
    dist = [math.hypot(bs.position.x - fss.x, bs.position.y - fss.y) for bs in env.scenario.base_stations]
    return _baseline(env, "baseline1", lambda k, ind: dist[k] > radius and ind <= i_th, i_th, w)


def baseline_in_threshold(
    env: LinkEnv, per_bs_threshold: float = -15.0, i_th: float | None = None, w: float | None = None
) -> ControlDecision:
    """Keep only BSs whose individual I/N is strictly below ``per_bs_threshold``."""
    i_th = env.weather.i_th if i_th is None else i_th
    w = env.scenario.weight if w is None else w
    return _baseline(env, "baseline2", lambda k, ind: ind < per_bs_threshold, i_th, w)
