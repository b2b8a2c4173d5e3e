"""Command line entry point.

Verbs: ``run``, ``validate-only``, ``verify``, ``bench``, ``show-config``.
Exit codes: 0 success, 1 validation error, 2 runtime error.
"""

from __future__ import annotations

import argparse
import logging
import sys
import time
from pathlib import Path

import numpy as np

from .algorithm import run
from .config import ConfigError, ExperimentConfig, PRESETS, preset
from .experiment import build_problem, graph_process, output_dir, run_experiment
from .geometry import ContractViolation
from .graphs import format_edge_list
from .schedule import ScheduleError
from .verification import estimator_battery

EXIT_OK, EXIT_VALIDATION, EXIT_RUNTIME = 0, 1, 2


def _csv_list(cast):
    def parse(text):
        return [cast(v) for v in text.split(",") if v.strip()]
    return parse


def _add_config_flags(ap: argparse.ArgumentParser) -> None:
    src = ap.add_mutually_exclusive_group()
    src.add_argument("--config", type=Path, help="JSON config file")
    src.add_argument("--preset", choices=sorted(PRESETS))
    ap.add_argument("--name")
    ap.add_argument("--n", type=int)
    ap.add_argument("--p", type=int)
    ap.add_argument("--T", type=int)
    ap.add_argument("--variant", choices=["theorem1", "corollary1", "corollary2"])
    ap.add_argument("--g", type=float)
    ap.add_argument("--g1", type=float)
    ap.add_argument("--g2", type=float)
    ap.add_argument("--g3", type=float)
    ap.add_argument("--F1", type=float)
    ap.add_argument("--lam", type=float)
    ap.add_argument("--edge-prob", type=float)
    ap.add_argument("--chain-augment", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--redraw-per-round", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--estimators", type=_csv_list(str), help="comma list of one_point,two_point")
    ap.add_argument("--init", choices=["origin", "uniform"])
    ap.add_argument("--labels", choices=["first_decision", "hidden_target"])
    ap.add_argument("--cadence", type=int)
    ap.add_argument("--dynamic-regret", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--static-regret", action=argparse.BooleanOptionalAction, default=None)
    ap.add_argument("--seeds", type=_csv_list(int), help="comma list of seeds")
    ap.add_argument("--workers", type=int)
    ap.add_argument("--output-dir")


def resolve_config(args) -> ExperimentConfig:
    if args.config is not None:
        cfg = ExperimentConfig.from_json(args.config.read_text(encoding="utf-8"))
    elif args.preset is not None:
        cfg = preset(args.preset)
    else:
        cfg = ExperimentConfig()
    top = {"name": "name", "n": "n", "p": "p", "T": "T", "F1": "F1", "lam": "lam",
           "estimators": "estimators", "init": "init", "labels": "labels", "seeds": "seeds",
           "workers": "workers", "output_dir": "output_dir"}
    for flag, key in top.items():
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg, key, v)
    for flag in ("variant", "g", "g1", "g2", "g3"):
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg.schedule, flag, v)
    for flag, key in (("edge_prob", "edge_prob"), ("chain_augment", "chain_augment"),
                      ("redraw_per_round", "redraw_per_round")):
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg.graph, key, v)
    for flag in ("cadence", "dynamic_regret", "static_regret"):
        v = getattr(args, flag)
        if v is not None:
            setattr(cfg.metrics, flag, v)
    return cfg


def _schedule_table(cfg: ExperimentConfig) -> str:
    problem, sched, _ = build_problem(cfg, cfg.seeds[0])
    lines = [f"variant={sched.variant} step_exp={sched.step_exp:g} dual_exp={sched.dual_exp:g} "
             f"explore_exp={sched.explore_exp:g} r={sched.r:g} p={sched.p} F1={sched.F1:.17g}",
             f"{'t':>5} {'alpha':>14} {'beta':>14} {'gamma':>14} {'xi':>14} {'delta':>14}"]
    for row in sched.table([1, 10, 100]):
        lines.append(f"{row['t']:>5} {row['alpha']:>14.6e} {row['beta']:>14.6e} {row['gamma']:>14.6e} "
                     f"{row['xi']:>14.6e} {row['delta']:>14.6e}")
    return "\n".join(lines)


def cmd_validate(args) -> int:
    cfg = resolve_config(args)
    cfg.validate()
    print(_schedule_table(cfg))
    return EXIT_OK


def cmd_run(args) -> int:
    cfg = resolve_config(args)
    cfg.validate()
    if args.validate_only:
        print(_schedule_table(cfg))
        return EXIT_OK
    paths = run_experiment(cfg)
    out = output_dir(cfg)
    (out / f"{cfg.name}_config.json").write_text(cfg.to_json(), encoding="utf-8")
    if args.export_graphs:
        for s in cfg.seeds:
            path = out / f"{cfg.name}_graphs_seed{s}.txt"
            path.write_text(format_edge_list(graph_process(cfg, s), range(1, cfg.T)), encoding="utf-8")
            paths.append(path)
    for p in paths:
        print(p)
    return EXIT_OK


def cmd_show_config(args) -> int:
    cfg = resolve_config(args)
    cfg.validate()
    sys.stdout.write(cfg.to_json())
    return EXIT_OK


def cmd_verify(args) -> int:
    report = estimator_battery(seed=args.seed, N=args.N, dims=tuple(args.dims))
    print(report.to_kv() if args.format == "kv" else report.to_text())
    print(f"overall={'PASS' if report.passed else 'FAIL'}")
    return EXIT_OK if report.passed else EXIT_RUNTIME


def cmd_bench(args) -> int:
    cfg = resolve_config(args)
    cfg.validate()
    seed = cfg.seeds[0]
    t0 = time.perf_counter()
    problem, sched, agents = build_problem(cfg, seed)
    t1 = time.perf_counter()
    for est in cfg.estimators:
        t2 = time.perf_counter()
        run(problem, graph_process(cfg, seed), sched, seed, cfg.T, agents=agents, estimator=est)
        dt = time.perf_counter() - t2
        print(f"{est}: {cfg.T} rounds x {cfg.n} agents in {dt:.3f}s "
              f"({cfg.T * cfg.n / dt:.0f} agent-steps/s)")
    print(f"problem setup: {t1 - t0:.3f}s")
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="banditpd", description=__doc__.splitlines()[0])
    ap.add_argument("-v", "--verbose", action="store_true")
    sub = ap.add_subparsers(dest="verb", required=True)

    p_run = sub.add_parser("run", help="run an experiment and write CSVs")
    _add_config_flags(p_run)
    p_run.add_argument("--validate-only", action="store_true",
                       help="validate and print the schedule table without simulating")
    p_run.add_argument("--export-graphs", action="store_true",
                       help="also write the per-round edge lists")
    p_run.set_defaults(func=cmd_run)

    p_val = sub.add_parser("validate-only", help="validate a config and print its schedule table")
    _add_config_flags(p_val)
    p_val.set_defaults(func=cmd_validate)

    p_show = sub.add_parser("show-config", help="print the resolved config as JSON")
    _add_config_flags(p_show)
    p_show.set_defaults(func=cmd_show_config)

    p_ver = sub.add_parser("verify", help="run the estimator verification battery")
    p_ver.add_argument("--seed", type=int, default=0)
    p_ver.add_argument("--N", type=int, default=1_000_000)
    p_ver.add_argument("--dims", type=_csv_list(int), default=[2, 4, 16])
    p_ver.add_argument("--format", choices=["text", "kv"], default="text")
    p_ver.set_defaults(func=cmd_verify)

    p_bench = sub.add_parser("bench", help="time the simulation loop")
    _add_config_flags(p_bench)
    p_bench.set_defaults(func=cmd_bench)
    return ap


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (ConfigError, ScheduleError, ContractViolation) as exc:
        print(f"validation error: {exc}", file=sys.stderr)
        return EXIT_VALIDATION
    except Exception as exc:  # noqa: BLE001 - surfaced as the runtime exit code
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


if __name__ == "__main__":
    sys.exit(main())
