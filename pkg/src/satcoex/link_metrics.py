"""Interference at the earth station, UE SNR and downlink capacity.

All absolute powers are dBm; I/N is a ratio in dB.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .antenna import DB_FLOOR, build_codebook, codebook_gains_dbi, fss_pattern_dbi, panel_frame
from .context import WeatherContext
from .propagation import (
    BuildingIndex,
    LosClass,
    ShadowFadingParams,
    path_loss_db,
    rain_attenuation_db_per_km,
)
from .scenario import Scenario

SECTOR_SPLIT_DB = 10.0 * math.log10(3.0)

Beam = tuple[int, int]  # (sub-array m, codebook entry n)


@dataclass(frozen=True)
class LinkBudget:
    tx_power: float
    tx_gain: float
    rx_gain: float
    path_loss: float
    sector_split_loss: float = SECTOR_SPLIT_DB

    @property
    def resulting_level(self) -> float:
        return self.tx_power + self.tx_gain + self.rx_gain - self.path_loss - self.sector_split_loss


def interference_level_dbm(tx_power: float, tx_gain: float, rx_gain: float, path_loss: float) -> float:
    return LinkBudget(tx_power, tx_gain, rx_gain, path_loss).resulting_level


def snr_db(tx_power: float, gain: float, path_loss: float, noise_dbm: float) -> float:
    return tx_power + gain - path_loss - noise_dbm - SECTOR_SPLIT_DB


def capacity_bps_hz(snr) -> float:
    snr = np.atleast_1d(np.asarray(snr, dtype=float))
    return float(np.sum(np.log2(1.0 + 10.0 ** (snr / 10.0))))


def dbm_to_mw(level: float) -> float:
    return 10.0 ** (level / 10.0)


def in_ratio_db(total_mw: float, noise_dbm: float) -> float:
    """I/N in dB, with the -200 dB floor for zero interference."""
    if total_mw <= 0.0:
        return DB_FLOOR
    return 10.0 * math.log10(total_mw) - noise_dbm


@dataclass(frozen=True)
class NetworkState:
    """Activations, per-sector beam sets and per-BS power (dBm).

    ``beams[k][j]`` is a tuple of (m, n) pairs; C4 allows at most one.
    """

    active: tuple[bool, ...]
    beams: tuple[tuple[tuple[Beam, ...], ...], ...]
    powers: tuple[float | None, ...]

    @classmethod
    def all_off(cls, n_bs: int) -> "NetworkState":
        return cls((False,) * n_bs, (((), (), ()),) * n_bs, (None,) * n_bs)

    @classmethod
    def build(cls, n_bs: int, assignment: dict) -> "NetworkState":
        """``assignment`` maps k -> (power_dbm, {sector j: (m, n) or [(m, n), ...]})."""
        active, beams, powers = [], [], []
        for k in range(n_bs):
            if k not in assignment:
                active.append(False)
                beams.append(((), (), ()))
                powers.append(None)
                continue
            p, sel = assignment[k]
            row = []
            for j in range(3):
                v = sel.get(j)
                if v is None:
                    row.append(())
                elif isinstance(v, list):
                    row.append(tuple(tuple(b) for b in v))
                else:
                    row.append((tuple(v),))
            active.append(True)
            beams.append(tuple(row))
            powers.append(float(p))
        return cls(tuple(active), tuple(beams), tuple(powers))

    @property
    def n_bs(self) -> int:
        return len(self.active)

    def active_count(self) -> int:
        return sum(self.active)

    def to_dict(self) -> dict:
        return {
            "active": [int(a) for a in self.active],
            "power_dbm": list(self.powers),
            "beams": [[[list(b) for b in sec] for sec in row] for row in self.beams],
        }


class LinkEnv:
    """Precomputed link table for one scenario under one weather context.

    Every gain, path loss and UE-to-beam assignment is computed once here;
    the per-state metrics are then pure lookups plus dB arithmetic.
    """

    def __init__(self, scenario: Scenario, weather: WeatherContext, index: BuildingIndex | None = None):
        self.scenario = scenario
        self.weather = weather
        s = scenario
        self.index = index if index is not None else BuildingIndex(s.buildings)
        self.codebook = build_codebook(s.antenna_config, s.n_beams)
        self.K = len(s.base_stations)
        self.S = s.n_subarrays
        self.N = len(self.codebook)
        self.fss_noise = s.fss.noise_power
        self.ue_noise = s.ue_noise_power
        sf = ShadowFadingParams(s.sigma_los, s.sigma_nlos, s.seed)
        rain = 0.0
        if weather.is_rainy and s.rain_model:
            rain = rain_attenuation_db_per_km(weather.rain_rate, s.carrier_frequency)
        self.rain_db_per_km = rain

        K, S, N = self.K, self.S, self.N
        fss_pt = s.fss.position.xyz()
        bore = s.fss.boresight()
        self.fss_distance = np.zeros(K)
        self.fss_los = np.zeros(K, dtype=int)
        self.fss_path_loss = np.zeros(K)
        self.fss_rx_gain = np.zeros(K)
        self.fss_tx_gain = np.full((K, 3, S, N), DB_FLOOR)
        self.cochannel = np.ones((K, 3), dtype=bool)

        ue_bs, ue_sec, ue_pl, ue_gains, ue_ids = [], [], [], [], []
        for k, bs in enumerate(s.base_stations):
            tx = bs.antenna_point
            vec = fss_pt - tx
            d3 = float(np.linalg.norm(vec))
            los = LosClass.NLOS if self.index.blocked(tx, fss_pt) else LosClass.LOS
            pl = path_loss_db(d3, s.carrier_frequency, los, sf, (0, bs.id), h_ut=float(fss_pt[2]))
            self.fss_distance[k] = d3
            self.fss_los[k] = int(los)
            self.fss_path_loss[k] = pl + rain * d3 / 1000.0
            back = -vec / d3
            off_axis = math.degrees(math.acos(max(-1.0, min(1.0, float(bore @ back)))))
            self.fss_rx_gain[k] = fss_pattern_dbi(s.fss.max_gain, off_axis)
            for j, sec in enumerate(bs.sectors):
                self.cochannel[k, j] = sec.cochannel
                frames = [panel_frame(sec.azimuth_center + sa.azimuth_offset, bs.down_tilt) for sa in sec.subarrays]
                for m, fr in enumerate(frames):
                    self.fss_tx_gain[k, j, m] = codebook_gains_dbi(s.antenna_config, self.codebook, fr, vec[None, :])[0]
                if not sec.ues:
                    continue
                pts = np.array([ue.position.xyz() for ue in sec.ues])
                vecs = pts - tx
                g = np.stack([codebook_gains_dbi(s.antenna_config, self.codebook, fr, vecs) for fr in frames], axis=1)
                for i, ue in enumerate(sec.ues):
                    d = float(np.linalg.norm(vecs[i]))
                    los_u = LosClass.NLOS if self.index.blocked(tx, pts[i]) else LosClass.LOS
                    pl_u = path_loss_db(d, s.carrier_frequency, los_u, sf, (1, bs.id, ue.id), h_ut=float(pts[i][2]))
                    ue_bs.append(k)
                    ue_sec.append(j)
                    ue_pl.append(pl_u + rain * d / 1000.0)
                    ue_gains.append(g[i])
                    ue_ids.append(ue.id)

        self.ue_bs = np.array(ue_bs, dtype=int)
        self.ue_sector = np.array(ue_sec, dtype=int)
        self.ue_path_loss = np.array(ue_pl, dtype=float)
        self.ue_ids = np.array(ue_ids, dtype=int)
        self.ue_gain_table = np.array(ue_gains).reshape(len(ue_bs), S, N) if ue_bs else np.zeros((0, S, N))

        # each UE is served by its max-gain beam in its own sector (first index on ties)
        flat = self.ue_gain_table.reshape(len(ue_bs), S * N)
        best = np.argmax(flat, axis=1) if len(ue_bs) else np.zeros(0, dtype=int)
        self.ue_beam = np.stack([best // N, best % N], axis=1) if len(ue_bs) else np.zeros((0, 2), dtype=int)
        self.ue_gain = flat[np.arange(len(ue_bs)), best] if len(ue_bs) else np.zeros(0)

        self.groups: dict[tuple[int, int], dict[Beam, np.ndarray]] = {}
        for u in range(len(ue_bs)):
            key = (int(self.ue_bs[u]), int(self.ue_sector[u]))
            beam = (int(self.ue_beam[u, 0]), int(self.ue_beam[u, 1]))
            self.groups.setdefault(key, {}).setdefault(beam, []).append(u)
        for key, d in self.groups.items():
            self.groups[key] = {b: np.array(v, dtype=int) for b, v in sorted(d.items())}

        # power-free part of each sector's interference level
        self.level_offset = self.fss_tx_gain + (self.fss_rx_gain - self.fss_path_loss - SECTOR_SPLIT_DB)[:, None, None, None]
        self.nominal = np.array([bs.nominal_power for bs in s.base_stations], dtype=float)
        self.power_offsets = s.power_range.offsets()

    # -- power grid ----------------------------------------------------------------

    def power_grid(self, k: int) -> tuple[float, ...]:
        return tuple(self.nominal[k] + off for off in self.power_offsets)

    @property
    def p_max(self) -> np.ndarray:
        return self.nominal + max(self.power_offsets)

    # -- interference ---------------------------------------------------------------

    def sector_level_dbm(self, k: int, j: int, beam: Beam, power: float) -> float:
        return float(power + self.level_offset[k, j, beam[0], beam[1]])

    def interference_budget(self, k: int, j: int, beam: Beam, power: float) -> LinkBudget:
        return LinkBudget(
            float(power),
            float(self.fss_tx_gain[k, j, beam[0], beam[1]]),
            float(self.fss_rx_gain[k]),
            float(self.fss_path_loss[k]),
        )

    def bs_mw(self, k: int, power: float, row) -> float:
        """Linear interference (mW) of BS k at ``power`` with per-sector beam sets ``row``."""
        total = 0.0
        for j in range(3):
            if not self.cochannel[k, j]:
                continue
            for beam in row[j]:
                total += 10.0 ** (self.sector_level_dbm(k, j, beam, power) / 10.0)
        return total

    def bs_interference_mw(self, k: int, state: NetworkState) -> float:
        if not state.active[k]:
            return 0.0
        return self.bs_mw(k, state.powers[k], state.beams[k])

    def total_interference_mw(self, state: NetworkState) -> float:
        total = 0.0
        for k in range(self.K):
            total += self.bs_interference_mw(k, state)
        return total

    def aggregate_in_db(self, state: NetworkState) -> float:
        return in_ratio_db(self.total_interference_mw(state), self.fss_noise)

    def bs_in_db(self, k: int, state: NetworkState) -> float:
        return in_ratio_db(self.bs_interference_mw(k, state), self.fss_noise)

    # -- access links ----------------------------------------------------------------

    def ue_snr_db(self, u: int, beam: Beam, power: float) -> float:
        return snr_db(power, float(self.ue_gain_table[u, beam[0], beam[1]]), float(self.ue_path_loss[u]), self.ue_noise)

    def beam_ues(self, k: int, j: int, beam: Beam) -> np.ndarray:
        return self.groups.get((k, j), {}).get(tuple(beam), np.zeros(0, dtype=int))

    def beam_ue_rates(self, k: int, j: int, beam: Beam, power: float) -> np.ndarray:
        """Per-UE capacity (bps/Hz) of the UEs assigned to ``beam``."""
        us = self.beam_ues(k, j, beam)
        snr = power + self.ue_gain[us] - self.ue_path_loss[us] - self.ue_noise - SECTOR_SPLIT_DB
        return np.log2(1.0 + 10.0 ** (snr / 10.0))

    def candidate_beams(self, k: int, j: int) -> list[Beam]:
        """Beams that serve at least one UE of the sector, in (m, n) order."""
        return list(self.groups.get((k, j), {}).keys())

    def bs_capacity(self, k: int, state: NetworkState) -> float:
        if not state.active[k]:
            return 0.0
        total = 0.0
        for j in range(3):
            for beam in state.beams[k][j]:
                total += float(np.sum(self.beam_ue_rates(k, j, beam, state.powers[k])))
        return total

    def bs_served(self, k: int, state: NetworkState) -> int:
        if not state.active[k]:
            return 0
        return sum(len(self.beam_ues(k, j, b)) for j in range(3) for b in state.beams[k][j])

    def total_capacity(self, state: NetworkState) -> float:
        return sum(self.bs_capacity(k, state) for k in range(self.K))

    def served_ues(self, state: NetworkState) -> int:
        return sum(self.bs_served(k, state) for k in range(self.K))


# module-level entry points mirroring the per-operation contracts


def sector_interference_db(env: LinkEnv, k: int, j: int, beam: Beam, power: float) -> float:
    return env.sector_level_dbm(k, j, beam, power)


def bs_interference_linear(env: LinkEnv, k: int, state: NetworkState) -> float:
    return env.bs_interference_mw(k, state)


def aggregate_in_db(env: LinkEnv, state: NetworkState) -> float:
    return env.aggregate_in_db(state)


def ue_snr_db(env: LinkEnv, u: int, beam: Beam, power: float) -> float:
    return env.ue_snr_db(u, beam, power)


def bs_capacity(env: LinkEnv, k: int, state: NetworkState) -> float:
    return env.bs_capacity(k, state)
