"""``satcoex`` command line: generate / run / compare.

Exit codes: 0 success, 1 every sweep row failed (or compare found a problem),
2 configuration error. Environment variables ``SATCOEX_CONFIG``,
``SATCOEX_SEED``, ``SATCOEX_OUT`` and ``SATCOEX_WORKERS`` fill in flags that
were not given on the command line.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

from .experiment import CompareError, ConfigError, ExperimentConfig, compare_policies, run_experiment
from .scenario import GeneratorParams, PowerRange, generate_synthetic_scenario, save_scenario, validate_scenario

ENV_PREFIX = "SATCOEX_"
EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _env(name: str):
    return os.environ.get(ENV_PREFIX + name)


def _int_opt(flag_val, env_name: str, label: str):
    if flag_val is not None:
        return flag_val
    raw = _env(env_name)
    if raw is None:
        return None
    try:
        return int(raw)
    except ValueError:
        raise ConfigError(f"{ENV_PREFIX}{env_name}: {label} must be an integer, got {raw!r}") from None


def _u64(text: str) -> int:
    v = int(text)
    if not 0 <= v < 2**64:
        raise argparse.ArgumentTypeError("seed must fit in an unsigned 64-bit integer")
    return v


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="satcoex", description="5G/FSS coexistence simulator")
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p):
        p.add_argument("--config", help="JSON config file")
        p.add_argument("--seed", type=_u64)
        p.add_argument("--out", help="output file or directory")

    g = sub.add_parser("generate", help="write a synthetic scenario JSON")
    common(g)

    r = sub.add_parser("run", help="run an experiment sweep")
    common(r)
    r.add_argument("--workers", type=int)

    c = sub.add_parser("compare", help="summarise a results.csv against cat3s")
    c.add_argument("results", help="path to results.csv")
    return ap


def _load_json(path) -> dict:
    try:
        return json.loads(Path(path).read_text())
    except (OSError, UnicodeDecodeError) as exc:
        raise ConfigError(f"cannot read {path}: {exc}") from None
    except json.JSONDecodeError as exc:
        raise ConfigError(f"{path}:{exc.lineno}: {exc.msg}") from None


def cmd_generate(args) -> int:
    cfg_path = args.config or _env("CONFIG")
    doc = _load_json(cfg_path) if cfg_path else {}
    if not isinstance(doc, dict):
        raise ConfigError("generator config must be a JSON object")
    gen = dict(doc.get("generator", doc))
    seed = _int_opt(args.seed, "SEED", "seed")
    seed = seed if seed is not None else int(doc.get("seed", 0))
    gen.pop("seed", None)
    for key in ("building_height", "building_size"):
        if key in gen:
            gen[key] = tuple(gen[key])
    if "power_range" in gen:
        gen["power_range"] = PowerRange(**gen["power_range"])
    try:
        params = GeneratorParams(**gen)
        scenario = generate_synthetic_scenario(params, seed)
    except (TypeError, ValueError) as exc:
        raise ConfigError(str(exc)) from None
    report = validate_scenario(scenario)
    if not report.ok:
        raise ConfigError("; ".join(report.messages()))
    out = Path(args.out or _env("OUT") or "scenario.json")
    if out.is_dir():
        out = out / "scenario.json"
    out.parent.mkdir(parents=True, exist_ok=True)
    save_scenario(scenario, out)
    print(f"wrote {out} ({len(scenario.base_stations)} BSs, {len(scenario.buildings)} buildings)")
    return EXIT_OK


def cmd_run(args) -> int:
    cfg_path = args.config or _env("CONFIG")
    cfg = ExperimentConfig.load(cfg_path) if cfg_path else ExperimentConfig()
    seed = _int_opt(args.seed, "SEED", "seed")
    workers = _int_opt(args.workers, "WORKERS", "workers")
    if seed is not None:
        cfg.seed = seed
    if workers is not None:
        cfg.workers = workers
    out = args.out or _env("OUT")
    if out:
        cfg.out = out
    cfg.validate()
    report = run_experiment(cfg)
    print(f"{len(report.rows)} rows, {report.n_errors} errors -> {report.out_dir}")
    return EXIT_FAILED if report.all_failed else EXIT_OK


def cmd_compare(args) -> int:
    try:
        summary = compare_policies(Path(args.results))
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except CompareError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAILED
    print(summary.table())
    return EXIT_FAILED if summary.violations else EXIT_OK


def main(argv=None) -> int:
    ap = build_parser()
    try:
        args = ap.parse_args(argv)
    except SystemExit as exc:
        return EXIT_CONFIG if exc.code else EXIT_OK
    handler = {"generate": cmd_generate, "run": cmd_run, "compare": cmd_compare}[args.command]
    try:
        return handler(args)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
