"""One-point and two-point zeroth-order estimators and Monte-Carlo smoothing."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np

from .geometry import ContractViolation, project_nonneg


@dataclass(frozen=True)
class LossGradEstimate:
    g: np.ndarray
    delta: float
    samples_used: int


@dataclass(frozen=True)
class ConstraintJacEstimate:
    J: np.ndarray  # shape (p, m): column k is the estimate for constraint k
    delta: float
    samples_used: int


def _check_delta(delta: float) -> None:
    if not delta > 0.0:
        raise ContractViolation(f"exploration radius must be positive, got {delta}")


def sample_unit_sphere(rng: np.random.Generator, p: int) -> np.ndarray:
    """Uniform point on the unit sphere in R^p via normalised Gaussians."""
    if p < 1:
        raise ContractViolation("dimension must be at least 1")
    while True:
        v = rng.standard_normal(p)
        norm = math.sqrt(v @ v)
        if norm > 0.0:
            return v / norm


def sample_unit_sphere_batch(rng: np.random.Generator, size: int, p: int) -> np.ndarray:
    v = rng.standard_normal((size, p))
    norm = np.linalg.norm(v, axis=1)
    bad = norm == 0.0
    while np.any(bad):
        v[bad] = rng.standard_normal((int(bad.sum()), p))
        norm = np.linalg.norm(v, axis=1)
        bad = norm == 0.0
    return v / norm[:, None]


def sample_unit_ball_batch(rng: np.random.Generator, size: int, p: int) -> np.ndarray:
    """Uniform points in the unit ball: sphere direction times ``U**(1/p)``."""
    u = sample_unit_sphere_batch(rng, size, p)
    radius = rng.random(size) ** (1.0 / p)
    return u * radius[:, None]


def estimate_loss_gradient(value: float, delta: float, u: np.ndarray, p: int) -> LossGradEstimate:
    """``(p / delta) * value * u`` from a single loss query at ``e + delta * u``."""
    _check_delta(delta)
    g = (p / delta) * float(value) * np.asarray(u, dtype=float)
    assert math.sqrt(g @ g) <= p * abs(value) / delta * (1 + 1e-12) + 1e-300
    return LossGradEstimate(g, delta, 1)


def estimate_constraint_jacobian(values, delta: float, u: np.ndarray, p: int) -> ConstraintJacEstimate:
    """Outer product ``(p / delta) * u [values]_+^T`` of shape ``(p, m)``."""
    _check_delta(delta)
    pos = project_nonneg(np.atleast_1d(values))
    J = np.outer(np.asarray(u, dtype=float), (p / delta) * pos)
    assert math.sqrt(np.sum(J * J)) <= p * math.sqrt(pos @ pos) / delta * (1 + 1e-12) + 1e-300
    return ConstraintJacEstimate(J, delta, 1)


def estimate_two_point(value_plus: float, value_minus: float, delta: float, u: np.ndarray,
                       p: int) -> LossGradEstimate:
    """Symmetric difference ``(p / 2 delta) (f(e + delta u) - f(e - delta u)) u``."""
    _check_delta(delta)
    g = (p / (2.0 * delta)) * (float(value_plus) - float(value_minus)) * np.asarray(u, dtype=float)
    return LossGradEstimate(g, delta, 2)


def estimate_two_point_jacobian(values_plus, values_minus, delta: float, u: np.ndarray,
                                p: int) -> ConstraintJacEstimate:
    _check_delta(delta)
    diff = project_nonneg(np.atleast_1d(values_plus)) - project_nonneg(np.atleast_1d(values_minus))
    J = np.outer(np.asarray(u, dtype=float), (p / (2.0 * delta)) * diff)
    return ConstraintJacEstimate(J, delta, 2)


def smoothed_value(f: Callable[[np.ndarray], np.ndarray], x, delta: float, n_mc: int,
                   rng: np.random.Generator, chunk: int = 200_000) -> tuple[float, float]:
    """Monte-Carlo estimate of ``E_v f(x + delta v)``, ``v`` uniform in the unit ball.

    ``f`` must be vectorised: it takes an ``(N, p)`` array of points and
    returns ``N`` values. Returns ``(mean, standard_error)``.
    """
    if n_mc < 1:
        raise ContractViolation("n_mc must be positive")
    x = np.asarray(x, dtype=float)
    p = x.size
    shift = None
    total = 0.0
    total_sq = 0.0
    done = 0
    while done < n_mc:
        k = min(chunk, n_mc - done)
        vals = np.asarray(f(x + delta * sample_unit_ball_batch(rng, k, p)), dtype=float)
        if shift is None:
            # sums of deviations from the first value: exact for constants, no cancellation
            shift = float(vals[0])
        dev = vals - shift
        total += dev.sum()
        total_sq += dev @ dev
        done += k
    mean = shift + total / n_mc
    if n_mc == 1:
        return float(mean), float("inf")
    var = max(total_sq - total * total / n_mc, 0.0) / (n_mc - 1)
    return float(mean), float(math.sqrt(var / n_mc))
