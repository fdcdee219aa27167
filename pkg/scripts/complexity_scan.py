#!/usr/bin/env python3
"""Time the greedy controller against the number of BSs and fit a log-log slope."""

import argparse
import math
import time

import numpy as np

from satcoex.context import WeatherContext
from satcoex.control import cat3s_control
from satcoex.link_metrics import LinkEnv
from satcoex.scenario import GeneratorParams, generate_synthetic_scenario


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--sizes", type=int, nargs="+", default=[8, 16, 32, 64, 128])
    ap.add_argument("--repeats", type=int, default=5)
    args = ap.parse_args()

    rows = []
    for k in args.sizes:
        # keep BS density fixed as K grows
        sc = generate_synthetic_scenario(GeneratorParams(n_bs=k, radius=5000.0 * math.sqrt(k / 33)), 70 + k)
        env = LinkEnv(sc, WeatherContext.sunny())
        ts = []
        for _ in range(args.repeats):
            t0 = time.perf_counter()
            dec = cat3s_control(env)
            ts.append(time.perf_counter() - t0)
        rows.append((k, float(np.median(ts)), dec.iterations))
        print(f"K={k:4d}  {rows[-1][1] * 1e3:8.1f} ms  outer/inner={dec.iterations}")
    ks, ts = zip(*[(r[0], r[1]) for r in rows])
    print(f"log-log slope: {np.polyfit(np.log(ks), np.log(ts), 1)[0]:.2f}")


if __name__ == "__main__":
    main()
