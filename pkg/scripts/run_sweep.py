#!/usr/bin/env python3
"""Run the default sweep (3 arrays x 4 pointing angles x 2 weathers) and print the comparison table."""

import argparse
from pathlib import Path

from satcoex.experiment import ExperimentConfig, compare_policies, run_experiment

HERE = Path(__file__).resolve().parent


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--config", default=HERE.parent / "data" / "configs" / "default_sweep.json")
    ap.add_argument("--out", default=None)
    ap.add_argument("--workers", type=int, default=None)
    args = ap.parse_args()

    cfg = ExperimentConfig.load(args.config)
    if args.out:
        cfg.out = args.out
    if args.workers:
        cfg.workers = args.workers
    rep = run_experiment(cfg)
    print(f"{len(rep.rows)} rows ({rep.n_errors} errors) written to {rep.out_dir}")
    print(compare_policies(rep.out_dir / "results.csv").table())


if __name__ == "__main__":
    main()
