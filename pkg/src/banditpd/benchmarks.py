"""Offline comparators for regret: the best fixed decision and per-round minimizers.

These are oracles used only by the metrics; they see the full problem data.

Two solvers are available:

``subgradient``
    Projected subgradient descent on the exact-penalty objective
    ``f(x) + rho * max(0, max_k c_k(x))`` with steps ``c0 / sqrt(k)``
    (normalised when the subgradient norm exceeds one), best-iterate
    tracking, and ``rho`` doubled after every stage that ends infeasible.
    Works for any :class:`OnlineProblem`.

``qp``
    For problems exposing ``quadratic_form`` and ``linear_constraints``
    (ridge): SLSQP on a working set of constraint rows, adding the most
    violated rows until all are satisfied.
"""

from __future__ import annotations

import numpy as np
from scipy.optimize import minimize

from .geometry import project

# penalty method constants
STAGE_ITERS = 20_000
MAX_ITERS = 100_000
RHO0 = 1.0

# working-set constants
BATCH_ROWS = 64
MAX_ROUNDS = 500


class BenchmarkError(RuntimeError):
    def __init__(self, msg: str, residuals: dict):
        super().__init__(f"{msg}: {residuals}")
        self.residuals = residuals


def _has_qp(problem) -> bool:
    return hasattr(problem, "quadratic_form") and hasattr(problem, "linear_constraints")


def static_benchmark(problem, tol: float = 1e-6, method: str = "auto") -> np.ndarray:
    """Minimizer of ``sum_t l_t(x)`` over ``X`` subject to ``c_t(x) <= 0`` for all ``t``."""
    return _solve(problem, np.arange(1, problem.T + 1), tol, method)


def dynamic_benchmark(problem, t: int, tol: float = 1e-6, method: str = "auto") -> np.ndarray:
    """Minimizer of ``l_t`` over ``X`` subject to ``c_t(x) <= 0``."""
    return _solve(problem, np.array([t]), tol, method)


def benchmark_objective(problem, x, rounds=None) -> float:
    rounds = range(1, problem.T + 1) if rounds is None else rounds
    return float(sum(problem.global_loss(t, x)[0] for t in rounds))


def max_violation(problem, x, rounds=None) -> float:
    rounds = range(1, problem.T + 1) if rounds is None else rounds
    return float(max(problem.global_constraint(t, x)[0].max() for t in rounds))


class DynamicComparators:
    """Lazily computed, cached per-round minimizers."""

    def __init__(self, problem, tol: float = 1e-6, method: str = "auto"):
        self.problem = problem
        self.tol = tol
        self.method = method
        self._cache: dict[int, np.ndarray] = {}

    def __getitem__(self, t: int) -> np.ndarray:
        if t not in self._cache:
            self._cache[t] = dynamic_benchmark(self.problem, t, self.tol, self.method)
        return self._cache[t]

    def sequence(self, T: int | None = None) -> np.ndarray:
        T = self.problem.T if T is None else T
        return np.array([self[t] for t in range(1, T + 1)])


def _solve(problem, rounds: np.ndarray, tol: float, method: str) -> np.ndarray:
    if method == "auto":
        method = "qp" if _has_qp(problem) else "subgradient"
    if method == "qp":
        H, g, _ = problem.quadratic_form(rounds)
        A, c = problem.linear_constraints(rounds)
        return _working_set_qp(H / len(rounds), g / len(rounds), A, c, problem.feasible_set, tol)
    if method == "subgradient":
        return _penalty_subgradient(problem, rounds, tol)
    raise ValueError(f"unknown benchmark method {method!r}")


def _penalty_subgradient(problem, rounds, tol: float) -> np.ndarray:
    X = problem.feasible_set
    scale = 1.0 / len(rounds)

    def objective(x):
        return scale * sum(problem.global_loss(t, x)[0] for t in rounds)

    def objective_grad(x):
        return scale * sum(problem.global_loss_grad(t, x) for t in rounds)

    def violation(x):
        best, arg = -np.inf, None
        for t in rounds:
            vals = problem.global_constraint(t, x)[0]
            k = int(np.argmax(vals))
            if vals[k] > best:
                best, arg = float(vals[k]), (t, k)
        return best, arg

    c0 = 0.5 * X.outer_radius
    rho = RHO0
    x = project(X, np.zeros(problem.p))
    best_x, best_obj, best_viol = x, np.inf, np.inf
    done = 0
    while done < MAX_ITERS:
        stage_best, stage_val = x, np.inf
        for k in range(1, STAGE_ITERS + 1):
            f = objective(x)
            v, arg = violation(x)
            pen = f + rho * max(0.0, v)
            if pen < stage_val:
                stage_best, stage_val = x, pen
            s = objective_grad(x)
            if v > 0.0:
                t, kk = arg
                s = s + rho * problem.global_constraint_grad(t, x)[:, kk]
            norm = np.linalg.norm(s)
            if norm == 0.0:
                break
            x = project(X, x - (c0 / np.sqrt(k)) * s / max(1.0, norm))
        done += k
        f = objective(stage_best)
        v, _ = violation(stage_best)
        if v <= tol and (best_viol > tol or f < best_obj):
            best_x, best_obj, best_viol = stage_best, f, v
        if v <= tol:
            return best_x
        rho *= 2.0
        x = stage_best
    if best_viol <= tol:
        return best_x
    raise BenchmarkError("penalty method did not reach feasibility",
                         {"iterations": done, "violation": float(v), "rho": rho})


def _working_set_qp(H, g, A, c, X, tol: float) -> np.ndarray:
    p = H.shape[0]
    bounds = list(zip(X.lo, X.hi)) if X.kind == "box" else None
    extra = []
    if X.kind == "ball":
        r2 = X.radius ** 2
        extra.append({"type": "ineq", "fun": lambda x: r2 - x @ x, "jac": lambda x: -2.0 * x})

    def fun(x):
        return 0.5 * x @ H @ x - g @ x

    def jac(x):
        return H @ x - g

    x = np.zeros(p)
    work = np.zeros(0, dtype=int)
    viol = A @ x - c
    for _ in range(MAX_ROUNDS):
        if work.size:
            Aw, cw = A[work], c[work]
            cons = [{"type": "ineq", "fun": lambda x, Aw=Aw, cw=cw: cw - Aw @ x,
                     "jac": lambda x, Aw=Aw: -Aw}] + extra
        else:
            cons = extra
        res = minimize(fun, x, jac=jac, method="SLSQP", bounds=bounds, constraints=cons,
                       options={"ftol": 1e-15, "maxiter": 2000})
        x = project(X, res.x)
        viol = A @ x - c
        bad = np.flatnonzero(viol > 0.1 * tol)
        if bad.size == 0:
            return x
        bad = bad[np.argsort(-viol[bad], kind="stable")][:BATCH_ROWS]
        new = np.setdiff1d(bad, work)
        if new.size == 0:
            if viol.max() <= tol:
                return x
            raise BenchmarkError("working-set QP stalled",
                                 {"violation": float(viol.max()), "rows": int(work.size),
                                  "status": res.message})
        work = np.union1d(work, new)
    raise BenchmarkError("working-set QP exceeded its round cap",
                         {"violation": float(viol.max()), "rows": int(work.size)})
