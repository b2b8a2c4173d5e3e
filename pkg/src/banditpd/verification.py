"""Statistical and structural checks of the estimator and dual-variable properties.

Every check returns a :class:`VerificationReport` that is a pure function of
its inputs and ``seed``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bandit
from .rng import Purpose, substream

UNBIASED_SE = 4.0
SANDWICH_SE = 3.0
DUAL_SLACK = 1e-9
LOW_POWER_N = 30
CHUNK = 100_000


@dataclass(frozen=True)
class CheckResult:
    name: str
    statistic: float
    threshold: float
    passed: bool
    samples: int
    seed: int | None
    low_power: bool = False
    detail: str = ""


@dataclass
class VerificationReport:
    checks: list[CheckResult] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.checks.extend(other.checks)
        return self

    def to_text(self) -> str:
        lines = []
        for c in self.checks:
            flag = "PASS" if c.passed else "FAIL"
            extra = " (low power)" if c.low_power else ""
            lines.append(f"[{flag}] {c.name}: statistic={c.statistic:.6g} threshold={c.threshold:.6g} "
                         f"samples={c.samples}{extra}" + (f" {c.detail}" if c.detail else ""))
        return "\n".join(lines)

    def to_kv(self) -> str:
        lines = []
        for c in self.checks:
            lines.append(
                f"check={c.name} statistic={c.statistic!r} threshold={c.threshold!r} "
                f"passed={int(c.passed)} samples={c.samples} seed={c.seed} low_power={int(c.low_power)}"
            )
        return "\n".join(lines)


def _rng(seed: int) -> np.random.Generator:
    return substream(seed, Purpose.MONTE_CARLO)


def _mean_and_se(draw: Callable[[int], np.ndarray], N: int) -> tuple[np.ndarray, np.ndarray]:
    """Chunked mean and per-coordinate standard error of ``N`` vector draws."""
    shift = None
    total = None
    total_sq = None
    done = 0
    while done < N:
        k = min(CHUNK, N - done)
        block = draw(k)
        if shift is None:
            shift = block[0].copy()
            total = np.zeros_like(shift)
            total_sq = np.zeros_like(shift)
        dev = block - shift
        total += dev.sum(axis=0)
        total_sq += np.einsum("k...,k...->...", dev, dev)
        done += k
    mean = shift + total / N
    if N < 2:
        return mean, np.full_like(mean, np.inf)
    var = np.maximum(total_sq - total * total / N, 0.0) / (N - 1)
    return mean, np.sqrt(var / N)


def _z_statistic(mean, se, truth) -> float:
    diff = np.abs(np.asarray(mean) - np.asarray(truth))
    with np.errstate(divide="ignore", invalid="ignore"):
        z = np.where(se > 0, diff / se, np.where(diff > 0, np.inf, 0.0))
    return float(np.max(z))


def check_unbiasedness(f: Callable[[np.ndarray], np.ndarray], smoothed_grad, x, delta: float,
                       N: int, seed: int, name: str = "unbiasedness") -> VerificationReport:
    """Mean of ``N`` one-point gradient estimates at ``x`` against the smoothed gradient.

    ``f`` is vectorised over rows. Passes when every coordinate is within
    four standard errors.
    """
    x = np.asarray(x, dtype=float)
    p = x.size
    rng = _rng(seed)

    def draw(k):
        u = bandit.sample_unit_sphere_batch(rng, k, p)
        vals = np.asarray(f(x + delta * u), dtype=float)
        return (p / delta) * vals[:, None] * u

    mean, se = _mean_and_se(draw, N)
    low = N < LOW_POWER_N
    stat = float("nan") if low else _z_statistic(mean, se, smoothed_grad)
    passed = (not low) and stat <= UNBIASED_SE
    return VerificationReport([CheckResult(name, stat, UNBIASED_SE, passed, N, seed, low)])


def check_jacobian_unbiasedness(c: Callable[[np.ndarray], np.ndarray], smoothed_jac, x, delta: float,
                                N: int, seed: int, name: str = "jacobian-unbiasedness") -> VerificationReport:
    """Mean of one-point Jacobian estimates of ``[c]_+`` against its smoothed Jacobian ``(p, m)``."""
    x = np.asarray(x, dtype=float)
    p = x.size
    rng = _rng(seed)

    def draw(k):
        u = bandit.sample_unit_sphere_batch(rng, k, p)
        vals = np.maximum(np.asarray(c(x + delta * u), dtype=float), 0.0)  # (k, m)
        return (p / delta) * u[:, :, None] * vals[:, None, :]

    mean, se = _mean_and_se(draw, N)
    low = N < LOW_POWER_N
    stat = float("nan") if low else _z_statistic(mean, se, smoothed_jac)
    passed = (not low) and stat <= UNBIASED_SE
    return VerificationReport([CheckResult(name, stat, UNBIASED_SE, passed, N, seed, low)])


def check_sandwich(f: Callable[[np.ndarray], np.ndarray], x, delta: float, F2: float, N: int,
                   seed: int, name: str = "sandwich") -> VerificationReport:
    """``f(x) - 3 SE <= smoothed f(x) <= f(x) + F2 delta + 3 SE`` by Monte Carlo over the ball."""
    x = np.asarray(x, dtype=float)
    fx = float(np.asarray(f(x[None, :]))[0])
    mean, se = bandit.smoothed_value(f, x, delta, N, _rng(seed))
    se_eff = 0.0 if not math.isfinite(se) else se
    lo = fx - SANDWICH_SE * se_eff
    hi = fx + F2 * delta + SANDWICH_SE * se_eff
    # statistic: distance outside the band (0 when inside)
    stat = max(lo - mean, mean - hi, 0.0)
    low = N < LOW_POWER_N
    detail = f"smoothed={mean:.9g} f(x)={fx:.9g} band=[{lo:.9g}, {hi:.9g}]"
    return VerificationReport([CheckResult(name, stat, 0.0, (not low) and stat <= 0.0, N, seed, low, detail)])


def check_constraint_sandwich(c: Callable[[np.ndarray], np.ndarray], q, x, delta: float, F2: float,
                              N: int, seed: int, name: str = "constraint-sandwich") -> VerificationReport:
    """The dual-weighted form ``q^T [c]_+`` of the sandwich, with Lipschitz constant ``F2 ||q||``."""
    q = np.asarray(q, dtype=float)
    if np.any(q < 0):
        raise ValueError("q must be nonnegative")

    def h(points):
        return np.maximum(np.asarray(c(points), dtype=float), 0.0) @ q

    return check_sandwich(h, x, delta, F2 * float(np.linalg.norm(q)), N, seed, name)


def check_smoothed_constraint_norm(c: Callable[[np.ndarray], np.ndarray], x, delta: float, F1: float,
                                   N: int, seed: int, name: str = "smoothed-constraint-norm") -> VerificationReport:
    """``||E_v [c(x + delta v)]_+|| <= F1`` up to three standard errors."""
    x = np.asarray(x, dtype=float)
    rng = _rng(seed)

    def draw(k):
        v = bandit.sample_unit_ball_batch(rng, k, x.size)
        return np.maximum(np.asarray(c(x + delta * v), dtype=float), 0.0)

    mean, se = _mean_and_se(draw, N)
    margin = SANDWICH_SE * float(np.linalg.norm(np.where(np.isfinite(se), se, 0.0)))
    stat = float(np.linalg.norm(mean))
    return VerificationReport([CheckResult(name, stat, F1 + margin, stat <= F1 + margin, N, seed,
                                           N < LOW_POWER_N)])


def check_dual_bound(trace, sched, F1: float, name: str = "dual-bound") -> VerificationReport:
    """``beta(t) ||q_{i,t}|| <= F1`` for every agent and recorded round."""
    T = len(trace)
    beta = sched.beta(np.arange(1, T + 1))
    qn = np.linalg.norm(trace.q[:T], axis=2)  # (T, n)
    excess = beta[:, None] * qn - F1
    worst = float(excess.max()) if excess.size else -F1
    bad = int(np.sum(excess > DUAL_SLACK))
    return VerificationReport([CheckResult(name, worst, DUAL_SLACK, bad == 0, int(qn.size), trace.seed,
                                           detail=f"violations={bad}")])


def check_trace_estimator_bounds(trace, F1: float, name: str = "estimator-norm-bounds") -> VerificationReport:
    """Post-hoc norm bounds of every estimate the run formed.

    The loss estimate has norm ``p |l| / delta`` and the Jacobian estimate
    ``p ||[c]_+|| / delta``, so both bounds reduce to the sampled values
    staying within ``F1``.
    """
    T = len(trace)
    worst_l = float(np.abs(trace.loss_values[:T]).max())
    worst_c = float(np.linalg.norm(np.maximum(trace.constraint_values[:T], 0.0), axis=2).max())
    stat = max(worst_l, worst_c)
    return VerificationReport([CheckResult(name, stat, F1, stat <= F1, int(trace.loss_values[:T].size),
                                           trace.seed)])


def check_feasibility(trace, feasible_set, sched, slack: float = 1e-12,
                      name: str = "feasibility") -> VerificationReport:
    """``x_{i,t}`` in ``X`` and ``e_{i,t}`` in ``(1 - xi_t) X`` for all recorded rounds."""
    T = len(trace)
    bad = 0
    for t in range(1, T + 1):
        shrink = 1.0 - float(sched.xi(t))
        for i in range(trace.n):
            if not feasible_set.contains(trace.x[t - 1, i], 1.0, slack):
                bad += 1
            if not feasible_set.contains(trace.e[t - 1, i], shrink, slack):
                bad += 1
    return VerificationReport([CheckResult(name, float(bad), 0.0, bad == 0, 2 * T * trace.n, trace.seed)])


def check_mixing_mean(trace, tol: float = 1e-12, name: str = "mixing-mean-preservation") -> VerificationReport:
    worst = float(np.max(trace.mix_mean_error[: len(trace)]))
    return VerificationReport([CheckResult(name, worst, tol, worst <= tol, len(trace), trace.seed)])


def estimator_battery(seed: int = 0, N: int = 1_000_000, dims=(2, 4, 16), delta: float = 0.5,
                      sandwich_N: int = 100_000) -> VerificationReport:
    """Unbiasedness (affine, quadratic, constraint) and sandwich checks for every ``p`` in ``dims``."""
    report = VerificationReport()
    for k, p in enumerate(dims):
        rng = substream(seed, Purpose.DATA, k, p)
        a = rng.uniform(-1.0, 1.0, p)
        b0 = float(rng.uniform(-1.0, 1.0))
        M = rng.uniform(-1.0, 1.0, (p, p))
        A = M @ M.T / p + np.eye(p)
        x = rng.uniform(-0.5, 0.5, p)
        s = seed * 1000 + 10 * k

        def affine(y, a=a, b0=b0):
            return y @ a + b0

        def quadratic(y, A=A, a=a):
            return 0.5 * np.einsum("kp,pq,kq->k", y, A, y) + y @ a

        report.extend(check_unbiasedness(affine, a, x, delta, N, s + 1, f"unbiased-affine-p{p}"))
        report.extend(check_unbiasedness(quadratic, A @ x + a, x, delta, N, s + 2, f"unbiased-quadratic-p{p}"))

        # constraint strictly positive on the whole ball: [c]_+ = c, smoothed Jacobian = B^T
        Bc = rng.uniform(0.0, 1.0, (2, p))
        bc = -(np.abs(Bc).sum(axis=1) * (np.abs(x).max() + delta) + 1.0)

        def con(y, Bc=Bc, bc=bc):
            return y @ Bc.T - bc

        report.extend(check_jacobian_unbiasedness(con, Bc.T, x, delta, N, s + 3, f"unbiased-jacobian-p{p}"))

        def l1(y):
            return np.abs(y).sum(axis=-1)

        x_kink = np.zeros(p)
        report.extend(check_sandwich(l1, x_kink, delta, math.sqrt(p), sandwich_N, s + 4, f"sandwich-l1-p{p}"))
        report.extend(check_sandwich(l1, x_kink, 1e-6, math.sqrt(p), sandwich_N, s + 5,
                                     f"sandwich-l1-small-delta-p{p}"))
        report.extend(check_sandwich(lambda y: np.full(len(y), 3.25), x, delta, 0.0, sandwich_N, s + 6,
                                     f"sandwich-constant-p{p}"))

        # constraint analogue on a kinked constraint (crosses zero inside the ball)
        Bk = rng.uniform(-1.0, 1.0, (2, p))
        bk = Bk @ x

        def kinked(y, Bk=Bk, bk=bk):
            return y @ Bk.T - bk

        F2k = float(np.linalg.norm(Bk, 2))
        qk = rng.uniform(0.0, 2.0, 2)
        report.extend(check_constraint_sandwich(kinked, qk, x, delta, F2k, sandwich_N, s + 7,
                                                f"constraint-sandwich-p{p}"))
        F1k = float(np.linalg.norm(np.abs(Bk).sum(axis=1) * (np.abs(x).max() + delta) + np.abs(bk)))
        report.extend(check_smoothed_constraint_norm(kinked, x, delta, F1k, sandwich_N, s + 8,
                                                     f"smoothed-constraint-norm-p{p}"))
    return report
