#!/usr/bin/env python3
"""Greedy vs exhaustive objective on random tiny instances; prints the ratio distribution."""

import argparse

import numpy as np

from satcoex.context import WeatherContext
from satcoex.control import brute_force_control, cat3s_control
from satcoex.link_metrics import LinkEnv
from satcoex.scenario import GeneratorParams, PowerRange, generate_synthetic_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("-n", type=int, default=200)
    ap.add_argument("--seed", type=int, default=0)
    args = ap.parse_args()

    rng = np.random.default_rng(args.seed)
    ratios = []
    for i in range(args.n):
        p = GeneratorParams(
            n_bs=int(rng.integers(1, 4)),
            radius=3000.0,
            ues_per_sector=int(rng.integers(1, 4)),
            coverage_radius=400.0,
            n_buildings=20,
            subarrays=1,
            n_beams=int(rng.choice([1, 2, 4])),
            power_range=PowerRange(-0.5, 0.5, 0.5),
        )
        w = WeatherContext.rainy(10.0) if i % 2 else WeatherContext.sunny()
        env = LinkEnv(generate_synthetic_scenario(p, int(rng.integers(2**32))), w)
        g, b = cat3s_control(env), brute_force_control(env)
        assert b.objective_value >= g.objective_value - 1e-9
        ratios.append(1.0 if b.objective_value == 0 else g.objective_value / b.objective_value)
    r = np.array(ratios)
    print(f"instances {len(r)}  median {np.median(r):.3f}  mean {r.mean():.3f}  min {r.min():.3f}")
    print(f"optimal {np.mean(r > 1 - 1e-9):.1%}   below 0.7 {np.mean(r < 0.7):.1%}")


if __name__ == "__main__":
    main()
