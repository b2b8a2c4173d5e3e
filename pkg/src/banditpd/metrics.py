"""Network regret, network cumulative constraint violation, and growth fits."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np


def _global_losses(trace, problem, T: int) -> np.ndarray:
    """``out[t-1, i] = l_t(x_{i,t})`` with ``l_t`` the agent-average loss."""
    return np.array([problem.global_loss(t, trace.x[t - 1]) for t in range(1, T + 1)])


def network_regret(trace, problem, comparators) -> np.ndarray:
    """Cumulative ``(1/n) sum_i sum_s l_s(x_{i,s}) - sum_s l_s(y_s)`` for every ``t``.

    ``comparators`` is either a ``(T, p)`` sequence or a single point used
    at every round.
    """
    T = len(trace)
    y = np.asarray(comparators, dtype=float)
    if y.ndim == 1:
        y = np.broadcast_to(y, (T, y.size))
    if y.shape[0] < T:
        raise ValueError(f"need {T} comparators, got {y.shape[0]}")
    played = _global_losses(trace, problem, T).mean(axis=1)
    bench = np.array([problem.global_loss(t, y[t - 1])[0] for t in range(1, T + 1)])
    return np.cumsum(played - bench)


def network_ccv(trace, problem) -> np.ndarray:
    """Cumulative ``(1/n) sum_i sum_s ||[c_s(x_{i,s})]_+||`` with ``c_s`` the stacked constraint."""
    T = len(trace)
    per_round = np.empty(T)
    for t in range(1, T + 1):
        viol = np.maximum(problem.global_constraint(t, trace.x[t - 1]), 0.0)
        per_round[t - 1] = np.linalg.norm(viol, axis=1).mean()
    return np.cumsum(per_round)


def cumulative_loss(trace, problem) -> np.ndarray:
    """Cumulative ``(1/n) sum_i sum_s l_s(x_{i,s})``."""
    return np.cumsum(_global_losses(trace, problem, len(trace)).mean(axis=1))


def path_length(comparators) -> float:
    y = np.asarray(comparators, dtype=float)
    if y.shape[0] < 1:
        raise ValueError("need at least one comparator")
    return float(np.linalg.norm(np.diff(y, axis=0), axis=1).sum())


@dataclass(frozen=True)
class GrowthFit:
    slope: float
    intercept: float
    r2: float
    t_lo: int
    t_hi: int


def fit_growth_exponent(series, t=None, window: str = "last-half") -> GrowthFit:
    """Least-squares slope of ``log(series)`` against ``log(t)``.

    ``t`` defaults to ``1..len(series)``; with ``window="last-half"`` only
    points with ``t > t_max / 2`` enter the fit.
    """
    y = np.asarray(series, dtype=float)
    t = np.arange(1, y.size + 1, dtype=float) if t is None else np.asarray(t, dtype=float)
    if window == "last-half":
        sel = t > t.max() / 2.0
    elif window == "all":
        sel = np.ones_like(t, dtype=bool)
    else:
        raise ValueError(f"unknown window {window!r}")
    y, t = y[sel], t[sel]
    if y.size < 2:
        raise ValueError("need at least two points in the fit window")
    if np.any(y <= 0.0):
        raise ValueError("series must be positive on the fit window")
    lx, ly = np.log(t), np.log(y)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    ss_tot = float(np.sum((ly - ly.mean()) ** 2))
    r2 = 1.0 - float(np.sum(resid ** 2)) / ss_tot if ss_tot > 0 else 1.0
    return GrowthFit(float(slope), float(intercept), r2, int(t.min()), int(t.max()))


@dataclass
class MetricSeries:
    """Cumulative metrics at the evaluated rounds ``t``."""

    t: np.ndarray
    regret_static: np.ndarray
    regret_dynamic: np.ndarray
    ccv: np.ndarray
    avg_loss: np.ndarray
    avg_ccv: np.ndarray
    samples: np.ndarray
    path_length: float = float("nan")

    COLUMNS = ("t", "regret_static", "regret_dynamic", "ccv", "avg_loss", "avg_ccv", "samples")


def default_cadence(n: int) -> int:
    return 1 if n <= 20 else 10


def evaluate(trace, problem, static_comparator=None, dynamic_comparators=None,
             cadence: int = 1) -> MetricSeries:
    """Compute every metric series and keep rows ``t = 1, 1 + k, ...`` plus ``t = T``.

    Sums always run over every round; the cadence only thins the output.
    """
    T = len(trace)
    cum_loss = cumulative_loss(trace, problem)
    ccv = network_ccv(trace, problem)
    nan = np.full(T, np.nan)
    reg_s = nan if static_comparator is None else network_regret(trace, problem, static_comparator)
    reg_d, pl = nan, float("nan")
    if dynamic_comparators is not None:
        reg_d = network_regret(trace, problem, dynamic_comparators)
        pl = path_length(dynamic_comparators)
    rows = np.arange(0, T, cadence)
    if rows[-1] != T - 1:
        rows = np.append(rows, T - 1)
    ts = rows + 1
    return MetricSeries(
        t=ts, regret_static=reg_s[rows], regret_dynamic=reg_d[rows], ccv=ccv[rows],
        avg_loss=cum_loss[rows] / ts, avg_ccv=ccv[rows] / ts,
        samples=trace.samples[rows].sum(axis=1), path_length=pl,
    )


def average_series(series: list[MetricSeries]) -> MetricSeries:
    """Pointwise mean over seeds; all inputs must share the same rounds."""
    base = series[0]
    for s in series[1:]:
        if not np.array_equal(s.t, base.t):
            raise ValueError("series evaluated at different rounds")

    def mean(name):
        return np.mean([getattr(s, name) for s in series], axis=0)

    return MetricSeries(
        t=base.t.copy(), regret_static=mean("regret_static"), regret_dynamic=mean("regret_dynamic"),
        ccv=mean("ccv"), avg_loss=mean("avg_loss"), avg_ccv=mean("avg_ccv"), samples=mean("samples"),
        path_length=float(np.mean([s.path_length for s in series])),
    )
