"""Convex feasible sets and the projections used by the primal-dual updates.

Only sets with closed-form Euclidean projections are supported: axis-aligned
boxes containing the origin in their interior and origin-centred balls.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np


class ContractViolation(ValueError):
    """Raised when an operation is called outside its preconditions."""


@dataclass(frozen=True, eq=False)
class FeasibleSet:
    """A box ``[lo, hi]`` or a Euclidean ball of radius ``radius``.

    ``inner_radius`` and ``outer_radius`` are the radii of the largest
    origin-centred ball contained in the set and the smallest one containing
    it. They are derived at construction and cannot be supplied.
    """

    kind: str
    dim: int
    lo: np.ndarray | None = None
    hi: np.ndarray | None = None
    radius: float | None = None
    inner_radius: float = field(init=False)
    outer_radius: float = field(init=False)

    def __post_init__(self):
        if self.kind == "box":
            lo = np.asarray(self.lo, dtype=float).copy()
            hi = np.asarray(self.hi, dtype=float).copy()
            if lo.shape != (self.dim,) or hi.shape != (self.dim,):
                raise ContractViolation("box bounds must have shape (dim,)")
            if not (np.all(lo < 0.0) and np.all(hi > 0.0)):
                raise ContractViolation("origin must be interior: need lo < 0 < hi")
            lo.flags.writeable = False
            hi.flags.writeable = False
            object.__setattr__(self, "lo", lo)
            object.__setattr__(self, "hi", hi)
            r = float(np.min(np.minimum(-lo, hi)))
            R = float(math.sqrt(np.sum(np.maximum(-lo, hi) ** 2)))
        elif self.kind == "ball":
            if self.radius is None or not self.radius > 0.0:
                raise ContractViolation("ball radius must be positive")
            object.__setattr__(self, "radius", float(self.radius))
            r = R = float(self.radius)
        else:
            raise ContractViolation(f"unknown set kind {self.kind!r}")
        object.__setattr__(self, "inner_radius", r)
        object.__setattr__(self, "outer_radius", R)

    @classmethod
    def box(cls, lo, hi) -> "FeasibleSet":
        lo = np.atleast_1d(np.asarray(lo, dtype=float))
        return cls("box", lo.size, lo=lo, hi=hi)

    @classmethod
    def cube(cls, half_width: float, dim: int) -> "FeasibleSet":
        """The box ``[-half_width, half_width]^dim``."""
        return cls.box(np.full(dim, -float(half_width)), np.full(dim, float(half_width)))

    @classmethod
    def ball(cls, radius: float, dim: int) -> "FeasibleSet":
        return cls("ball", int(dim), radius=radius)

    def __eq__(self, other):
        if not isinstance(other, FeasibleSet) or other.kind != self.kind or other.dim != self.dim:
            return False
        if self.kind == "box":
            return np.array_equal(self.lo, other.lo) and np.array_equal(self.hi, other.hi)
        return self.radius == other.radius

    def __hash__(self):
        if self.kind == "box":
            return hash((self.kind, self.lo.tobytes(), self.hi.tobytes()))
        return hash((self.kind, self.dim, self.radius))

    def contains(self, x, scale: float = 1.0, slack: float = 1e-12) -> bool:
        """Membership test for ``scale * X`` with an absolute slack."""
        x = np.asarray(x, dtype=float)
        if self.kind == "box":
            return bool(np.all(x >= scale * self.lo - slack) and np.all(x <= scale * self.hi + slack))
        return bool(np.linalg.norm(x) <= scale * self.radius + slack)

    def max_abs_linear(self, a: np.ndarray) -> np.ndarray:
        """Upper bound of ``|a^T x|`` over the set, row-wise for 2-D ``a``."""
        a = np.asarray(a, dtype=float)
        if self.kind == "box":
            reach = np.maximum(-self.lo, self.hi)
            return np.abs(a) @ reach
        return self.radius * np.linalg.norm(a, axis=-1)

    def max_sq_norm(self) -> float:
        return self.outer_radius ** 2


def _check_dim(s: FeasibleSet, z: np.ndarray) -> None:
    if z.shape[-1] != s.dim:
        raise ContractViolation(f"dimension mismatch: set has dim {s.dim}, point has {z.shape[-1]}")


def project(s: FeasibleSet, z) -> np.ndarray:
    """Euclidean projection onto ``s``. Works row-wise on 2-D input."""
    z = np.asarray(z, dtype=float)
    _check_dim(s, z)
    if s.kind == "box":
        return np.minimum(np.maximum(z, s.lo), s.hi)
    norm = np.linalg.norm(z, axis=-1, keepdims=True)
    # leave feasible points untouched so the projection is exactly idempotent
    factor = np.where(norm > s.radius, s.radius / np.where(norm > 0.0, norm, 1.0), 1.0)
    return z * factor


def project_scaled(s: FeasibleSet, c: float, z) -> np.ndarray:
    """Projection onto ``c * s`` for ``c`` in (0, 1], computed as ``c * P(z / c)``."""
    if not 0.0 < c <= 1.0:
        raise ContractViolation(f"scale factor must lie in (0, 1], got {c}")
    z = np.asarray(z, dtype=float)
    return c * project(s, z / c)


def project_nonneg(v) -> np.ndarray:
    """Componentwise ``max(0, v)``."""
    return np.maximum(np.asarray(v, dtype=float), 0.0)
