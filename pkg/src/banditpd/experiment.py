"""Run configured experiments and write their metric series as CSV."""

from __future__ import annotations

import csv
import logging
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .algorithm import init_agents, run
from .benchmarks import DynamicComparators, static_benchmark
from .config import ExperimentConfig
from .geometry import FeasibleSet
from .graphs import GraphProcess
from .metrics import MetricSeries, average_series, evaluate
from .problems import make_ridge_problem

log = logging.getLogger(__name__)

OUTPUT_ENV = "BANDITPD_OUTPUT_DIR"


@dataclass
class SeedResult:
    seed: int
    estimator: str
    series: MetricSeries
    F1: float


def build_problem(cfg: ExperimentConfig, seed: int):
    """Agents first (labels depend on their first decisions), then the problem, then the schedule."""
    X = FeasibleSet.cube(cfg.box_half_width, cfg.p)
    # delta(1) and xi(1) do not depend on F1, so a placeholder is enough to place the agents
    provisional = cfg.make_schedule(1.0)
    agents = init_agents(cfg.n, X, provisional, cfg.m_i, seed, cfg.init)
    x0 = np.array([a.x for a in agents]) if cfg.labels == "first_decision" else None
    problem = make_ridge_problem(cfg.n, cfg.T, seed, x0, p=cfg.p, m_i=cfg.m_i, lam=cfg.lam,
                                 feasible_set=X)
    F1 = cfg.F1 if cfg.F1 is not None else problem.F1
    sched = cfg.make_schedule(F1, horizon=cfg.T)
    agents = init_agents(cfg.n, X, sched, cfg.m_i, seed, cfg.init)
    return problem, sched, agents


def graph_process(cfg: ExperimentConfig, seed: int) -> GraphProcess:
    g = cfg.graph
    return GraphProcess(cfg.n, g.edge_prob, seed, g.chain_augment, g.redraw_per_round)


def run_seed(cfg: ExperimentConfig, seed: int) -> list[SeedResult]:
    problem, sched, agents = build_problem(cfg, seed)
    graphs = graph_process(cfg, seed)
    static = static_benchmark(problem, cfg.metrics.benchmark_tol) if cfg.metrics.static_regret else None
    dynamic = None
    if cfg.metrics.dynamic_regret:
        dynamic = DynamicComparators(problem, cfg.metrics.benchmark_tol).sequence(cfg.T)
    out = []
    for est in cfg.estimators:
        trace = run(problem, graphs, sched, seed, cfg.T, agents=agents, estimator=est)
        series = evaluate(trace, problem, static, dynamic, cfg.cadence())
        out.append(SeedResult(seed, est, series, sched.F1))
        log.info("seed %d %s: final ccv %.6g", seed, est, series.ccv[-1])
    return out


def _fmt(v) -> str:
    return format(float(v), ".17g")


def emit_csv(series: MetricSeries, path) -> Path:
    """Write one row per evaluated round with 17 significant digits."""
    path = Path(path)
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="", encoding="utf-8") as fh:
            w = csv.writer(fh, lineterminator="\n")
            w.writerow(MetricSeries.COLUMNS)
            for k in range(series.t.size):
                w.writerow([
                    int(series.t[k]), _fmt(series.regret_static[k]), _fmt(series.regret_dynamic[k]),
                    _fmt(series.ccv[k]), _fmt(series.avg_loss[k]), _fmt(series.avg_ccv[k]),
                    _fmt(series.samples[k]),
                ])
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc
    return path


def read_csv(path) -> dict[str, np.ndarray]:
    with open(path, newline="", encoding="utf-8") as fh:
        rows = list(csv.reader(fh))
    header, body = rows[0], rows[1:]
    cols = list(zip(*body)) if body else [[] for _ in header]
    return {h: np.array([float(v) for v in col]) for h, col in zip(header, cols)}


def output_dir(cfg: ExperimentConfig) -> Path:
    return Path(cfg.output_dir or os.environ.get(OUTPUT_ENV) or "results")


def run_experiment(cfg: ExperimentConfig) -> list[Path]:
    """Validate, run every seed and estimator, write per-seed and seed-averaged CSVs."""
    cfg.validate()
    if cfg.workers > 1 and len(cfg.seeds) > 1:
        with ProcessPoolExecutor(max_workers=cfg.workers) as pool:
            per_seed = list(pool.map(run_seed, [cfg] * len(cfg.seeds), cfg.seeds))
    else:
        per_seed = [run_seed(cfg, s) for s in cfg.seeds]
    out_dir = output_dir(cfg)
    written = []
    for k, est in enumerate(cfg.estimators):
        runs = [results[k] for results in per_seed]
        for r in runs:
            written.append(emit_csv(r.series, out_dir / f"{cfg.name}_{est}_seed{r.seed}.csv"))
        written.append(emit_csv(average_series([r.series for r in runs]), out_dir / f"{cfg.name}_{est}_mean.csv"))
    return written
