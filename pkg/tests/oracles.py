"""Independent reference computations used by the tests.

Nothing here calls into the code paths it is used to check: the grid
search works on raw instance arrays, and the metric oracles use the scalar
per-agent oracles in explicit double loops.
"""

from __future__ import annotations

import math

import numpy as np


def grid_search_ridge(problem, rounds, h: float = 1e-3, rows_per_chunk: int = 512, lo=None, hi=None):
    """Exhaustive search over a ``h``-spaced grid of the 2-D box (or of ``[lo, hi]``).

    Returns ``(best_point, best_objective)`` among grid points satisfying every
    constraint of ``rounds``; the objective is ``sum_t (1/n) sum_i l_{i,t}``.
    The objective is expanded into monomials of ``(x0, x1)`` from the raw
    arrays, and each linear constraint becomes an interval in ``x1`` for a
    fixed ``x0``; every grid point is still scored.
    """
    assert problem.p == 2
    lo = problem.feasible_set.lo if lo is None else np.asarray(lo, dtype=float)
    hi = problem.feasible_set.hi if hi is None else np.asarray(hi, dtype=float)
    n, lam = problem.n, problem.lam
    c00 = c01 = c11 = d0 = d1 = e = 0.0
    rows = []
    for t in rounds:
        for i in range(n):
            a0, a1 = problem.a[t - 1, i]
            m = problem.labels[t - 1, i]
            c00 += (0.5 * a0 * a0 + lam) / n
            c11 += (0.5 * a1 * a1 + lam) / n
            c01 += a0 * a1 / n
            d0 += a0 * m / n
            d1 += a1 * m / n
            e += 0.5 * m * m / n
            for k in range(problem.B.shape[2]):
                rows.append((*problem.B[t - 1, i, k], problem.b[t - 1, i, k]))
    g0 = np.linspace(lo[0], hi[0], int(round((hi[0] - lo[0]) / h)) + 1)
    g1 = np.linspace(lo[1], hi[1], int(round((hi[1] - lo[1]) / h)) + 1)
    col1 = c11 * g1 * g1 - d1 * g1
    best_val, best_pt = math.inf, None
    for start in range(0, g0.size, rows_per_chunk):
        x0 = g0[start:start + rows_per_chunk]
        obj = (c00 * x0 * x0 - d0 * x0 + e)[:, None] + col1[None, :] + c01 * x0[:, None] * g1[None, :]
        # B0 x0 + B1 x1 <= b  <=>  x1 <= (b - B0 x0) / B1 when B1 > 0 (and >= when B1 < 0)
        upper = np.full(x0.size, np.inf)
        lower = np.full(x0.size, -np.inf)
        ok = np.ones(x0.size, dtype=bool)
        for B0, B1, bk in rows:
            rhs = bk - B0 * x0
            if B1 > 0:
                upper = np.minimum(upper, rhs / B1)
            elif B1 < 0:
                lower = np.maximum(lower, rhs / B1)
            else:
                ok &= rhs >= 0.0
        feas = (g1[None, :] <= upper[:, None]) & (g1[None, :] >= lower[:, None]) & ok[:, None]
        obj = np.where(feas, obj, np.inf)
        k = int(np.argmin(obj))
        if obj.flat[k] < best_val:
            best_val = float(obj.flat[k])
            r, c = divmod(k, g1.size)
            best_pt = np.array([x0[r], g1[c]])
    return best_pt, best_val


def refined_grid_search_ridge(problem, rounds, half_width: float = 0.05, h: float = 5e-5):
    """Coarse 1e-3 grid, then a fine grid on a window around the coarse optimum, clipped to the box."""
    x, _ = grid_search_ridge(problem, rounds)
    X = problem.feasible_set
    lo = np.maximum(x - half_width, X.lo)
    hi = np.minimum(x + half_width, X.hi)
    return grid_search_ridge(problem, rounds, h, lo=lo, hi=hi)


def small_ridge_instance(k: int):
    """The ``k``-th random n=2, p=2, T=3 instance used for the oracle comparison."""
    from banditpd.problems import make_ridge_problem

    rng = np.random.default_rng(10_000 + k)
    return make_ridge_problem(2, 3, seed=k, x0=rng.uniform(-1.0, 1.0, (2, 2)), p=2)


def brute_force_regret(trace, problem, comparators):
    T, n = len(trace), problem.n
    out, total = [], 0.0
    for t in range(1, T + 1):
        played = 0.0
        for i in range(n):
            li = 0.0
            for j in range(n):
                li += problem.loss(j, t, trace.x[t - 1, i])
            played += li / n
        bench = 0.0
        for j in range(n):
            bench += problem.loss(j, t, comparators[t - 1])
        total += played / n - bench / n
        out.append(total)
    return np.array(out)


def brute_force_ccv(trace, problem):
    T, n = len(trace), problem.n
    out, total = [], 0.0
    for t in range(1, T + 1):
        acc = 0.0
        for i in range(n):
            sq = 0.0
            for j in range(n):
                for v in problem.constraint(j, t, trace.x[t - 1, i]):
                    sq += max(v, 0.0) ** 2
            acc += math.sqrt(sq)
        total += acc / n
        out.append(total)
    return np.array(out)


def ball_moment(p: int, delta: float) -> float:
    """``E ||delta v||^2`` for ``v`` uniform in the unit ball of R^p."""
    return delta ** 2 * p / (p + 2)
