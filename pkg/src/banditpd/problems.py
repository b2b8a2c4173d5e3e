"""Online problem instances.

An :class:`OnlineProblem` exposes per-agent, per-round loss and constraint
oracles (rounds are 1-based) together with exact subgradients, the feasible
set, and certified bounds ``F1`` (values) and ``F2`` (subgradients) over it.
The global loss at round ``t`` is the agent average of local losses; the
global constraint stacks every agent's constraint vector in agent order.
"""

from __future__ import annotations

import io
from typing import Callable, Sequence

import numpy as np

from .geometry import FeasibleSet
from .rng import Purpose, Streams

FORMAT_VERSION = 1


class OnlineProblem:
    """Base class. Subclasses implement the four scalar oracles.

    The batched helpers below fall back to loops over the scalar oracles;
    subclasses with structure override them.
    """

    n: int
    p: int
    T: int
    m: list[int]
    feasible_set: FeasibleSet
    F1: float
    F2: float

    def loss(self, i: int, t: int, x) -> float:
        raise NotImplementedError

    def constraint(self, i: int, t: int, x) -> np.ndarray:
        raise NotImplementedError

    def loss_subgrad(self, i: int, t: int, x) -> np.ndarray:
        raise NotImplementedError

    def constraint_subgrad(self, i: int, t: int, x) -> np.ndarray:
        """Shape ``(p, m_i)``; column ``k`` is a subgradient of constraint ``k``."""
        raise NotImplementedError

    @property
    def m_total(self) -> int:
        return int(sum(self.m))

    def global_loss(self, t: int, X: np.ndarray) -> np.ndarray:
        """``l_t(x) = mean_j l_{j,t}(x)`` for every row of ``X``."""
        X = np.atleast_2d(X)
        return np.array([np.mean([self.loss(j, t, x) for j in range(self.n)]) for x in X])

    def global_constraint(self, t: int, X: np.ndarray) -> np.ndarray:
        """Stacked constraints ``col(c_{1,t}(x), ..., c_{n,t}(x))`` for every row of ``X``."""
        X = np.atleast_2d(X)
        return np.array([np.concatenate([self.constraint(j, t, x) for j in range(self.n)]) for x in X])

    def global_loss_grad(self, t: int, x) -> np.ndarray:
        return np.mean([self.loss_subgrad(j, t, x) for j in range(self.n)], axis=0)

    def global_constraint_grad(self, t: int, x) -> np.ndarray:
        return np.concatenate([self.constraint_subgrad(j, t, x) for j in range(self.n)], axis=1)


class FunctionProblem(OnlineProblem):
    """Problem assembled from plain callables ``f(i, t, x)``.

    Subgradient callables default to central finite differences, which is
    adequate for the smooth test problems this class is meant for.
    """

    def __init__(self, n: int, p: int, T: int, m: Sequence[int], feasible_set: FeasibleSet,
                 loss: Callable, constraint: Callable, loss_subgrad: Callable | None = None,
                 constraint_subgrad: Callable | None = None, F1: float | None = None,
                 F2: float | None = None):
        self.n, self.p, self.T = n, p, T
        self.m = list(m)
        self.feasible_set = feasible_set
        self._loss, self._constraint = loss, constraint
        self._loss_subgrad, self._constraint_subgrad = loss_subgrad, constraint_subgrad
        self.F1 = F1 if F1 is not None else float("nan")
        self.F2 = F2 if F2 is not None else float("nan")

    def loss(self, i, t, x):
        return float(self._loss(i, t, np.asarray(x, dtype=float)))

    def constraint(self, i, t, x):
        return np.atleast_1d(np.asarray(self._constraint(i, t, np.asarray(x, dtype=float)), dtype=float))

    def _fd(self, fn, x, h=1e-6):
        x = np.asarray(x, dtype=float)
        cols = []
        for k in range(self.p):
            step = np.zeros(self.p)
            step[k] = h
            cols.append((np.atleast_1d(fn(x + step)) - np.atleast_1d(fn(x - step))) / (2 * h))
        return np.array(cols)

    def loss_subgrad(self, i, t, x):
        if self._loss_subgrad is not None:
            return np.asarray(self._loss_subgrad(i, t, np.asarray(x, dtype=float)), dtype=float)
        return self._fd(lambda y: self.loss(i, t, y), x)[:, 0]

    def constraint_subgrad(self, i, t, x):
        if self._constraint_subgrad is not None:
            return np.asarray(self._constraint_subgrad(i, t, np.asarray(x, dtype=float)), dtype=float)
        return self._fd(lambda y: self.constraint(i, t, y), x)


class RidgeProblem(OnlineProblem):
    """Online ridge regression with random linear inequality constraints.

    ``l_{i,t}(x) = 0.5 (a_{i,t}^T x - m_{i,t})^2 + lam ||x||^2`` and
    ``c_{i,t}(x) = B_{i,t} x - b_{i,t}``, with labels
    ``m_{i,t} = a_{i,t}^T x0_i + upsilon_{i,t} / (4 t)``.

    Arrays are indexed ``[t - 1, i, ...]``.
    """

    def __init__(self, a, B, b, upsilon, x0, lam: float, feasible_set: FeasibleSet):
        self.a = np.asarray(a, dtype=float)
        self.B = np.asarray(B, dtype=float)
        self.b = np.asarray(b, dtype=float)
        self.upsilon = np.asarray(upsilon, dtype=float)
        self.x0 = np.asarray(x0, dtype=float)
        self.lam = float(lam)
        self.mu = 2.0 * self.lam
        self.feasible_set = feasible_set
        self.T, self.n, self.p = self.a.shape
        mi = self.B.shape[2]
        self.m = [mi] * self.n
        rounds = np.arange(1, self.T + 1, dtype=float)[:, None]
        self.labels = np.einsum("tip,ip->ti", self.a, self.x0) + self.upsilon / (4.0 * rounds)
        for arr in (self.a, self.B, self.b, self.upsilon, self.x0, self.labels):
            arr.flags.writeable = False
        self.F1, self.F2 = self._certify_bounds()

    def _certify_bounds(self) -> tuple[float, float]:
        X = self.feasible_set
        sq = X.max_sq_norm()
        resid = X.max_abs_linear(self.a) + np.abs(self.labels)
        loss_bound = 0.5 * resid ** 2 + self.lam * sq
        con_rows = X.max_abs_linear(self.B) + np.abs(self.b)
        con_bound = np.sqrt(np.sum(con_rows ** 2, axis=-1))
        F1 = float(max(loss_bound.max(), con_bound.max()))
        loss_grad = resid * np.linalg.norm(self.a, axis=-1) + 2.0 * self.lam * np.sqrt(sq)
        con_grad = np.linalg.norm(self.B, axis=(-2, -1))
        F2 = float(max(loss_grad.max(), con_grad.max()))
        return F1, F2

    # scalar oracles
    def loss(self, i, t, x):
        x = np.asarray(x, dtype=float)
        r = self.a[t - 1, i] @ x - self.labels[t - 1, i]
        return float(0.5 * r * r + self.lam * (x @ x))

    def constraint(self, i, t, x):
        return self.B[t - 1, i] @ np.asarray(x, dtype=float) - self.b[t - 1, i]

    def loss_subgrad(self, i, t, x):
        x = np.asarray(x, dtype=float)
        r = self.a[t - 1, i] @ x - self.labels[t - 1, i]
        return r * self.a[t - 1, i] + 2.0 * self.lam * x

    def constraint_subgrad(self, i, t, x):
        return self.B[t - 1, i].T.copy()

    # batched forms
    def local_losses(self, t: int, X: np.ndarray) -> np.ndarray:
        """``l_{i,t}(X[i])`` for every agent ``i``."""
        r = np.einsum("ip,ip->i", self.a[t - 1], X) - self.labels[t - 1]
        return 0.5 * r * r + self.lam * np.einsum("ip,ip->i", X, X)

    def local_constraints(self, t: int, X: np.ndarray) -> np.ndarray:
        return np.einsum("ikp,ip->ik", self.B[t - 1], X) - self.b[t - 1]

    def global_loss(self, t, X):
        X = np.atleast_2d(X)
        r = X @ self.a[t - 1].T - self.labels[t - 1]  # (rows, n)
        return np.mean(0.5 * r * r, axis=1) + self.lam * np.einsum("kp,kp->k", X, X)

    def global_constraint(self, t, X):
        X = np.atleast_2d(X)
        Bt = self.B[t - 1].reshape(-1, self.p)
        return X @ Bt.T - self.b[t - 1].reshape(-1)

    def global_loss_grad(self, t, x):
        x = np.asarray(x, dtype=float)
        r = self.a[t - 1] @ x - self.labels[t - 1]
        return r @ self.a[t - 1] / self.n + 2.0 * self.lam * x

    def global_constraint_grad(self, t, x):
        return self.B[t - 1].reshape(-1, self.p).T.copy()

    def quadratic_form(self, rounds=None):
        """``(H, g, const)`` with ``sum_{t in rounds} l_t(x) = 0.5 x^T H x - g^T x + const``."""
        sl = slice(None) if rounds is None else np.asarray(rounds) - 1
        a = self.a[sl].reshape(-1, self.p)
        lab = self.labels[sl].reshape(-1)
        count = a.shape[0] // self.n
        H = a.T @ a / self.n + 2.0 * self.lam * count * np.eye(self.p)
        g = a.T @ lab / self.n
        const = 0.5 * float(lab @ lab) / self.n
        return H, g, const

    def linear_constraints(self, rounds=None):
        """``(A, c)`` stacking every constraint row ``A x <= c`` over ``rounds``."""
        sl = slice(None) if rounds is None else np.asarray(rounds) - 1
        return self.B[sl].reshape(-1, self.p), self.b[sl].reshape(-1)

    # serialization
    def to_bytes(self) -> bytes:
        buf = io.BytesIO()
        X = self.feasible_set
        np.savez(
            buf, format_version=np.array(FORMAT_VERSION), kind=np.array("ridge"),
            a=self.a, B=self.B, b=self.b, upsilon=self.upsilon, x0=self.x0,
            lam=np.array(self.lam), set_kind=np.array(X.kind),
            lo=X.lo if X.kind == "box" else np.zeros(0),
            hi=X.hi if X.kind == "box" else np.zeros(0),
            radius=np.array(X.radius if X.kind == "ball" else np.nan),
        )
        return buf.getvalue()

    @classmethod
    def from_bytes(cls, blob: bytes) -> "RidgeProblem":
        with np.load(io.BytesIO(blob), allow_pickle=False) as z:
            version = int(z["format_version"])
            if version != FORMAT_VERSION or str(z["kind"]) != "ridge":
                raise ValueError(f"unsupported instance dump (version {version}, kind {z['kind']})")
            if str(z["set_kind"]) == "box":
                X = FeasibleSet.box(z["lo"], z["hi"])
            else:
                X = FeasibleSet.ball(float(z["radius"]), z["a"].shape[-1])
            return cls(z["a"], z["B"], z["b"], z["upsilon"], z["x0"], float(z["lam"]), X)

    def save(self, path) -> None:
        with open(path, "wb") as fh:
            fh.write(self.to_bytes())

    @classmethod
    def load(cls, path) -> "RidgeProblem":
        with open(path, "rb") as fh:
            return cls.from_bytes(fh.read())


def make_ridge_problem(n: int, T: int, seed: int, x0=None, *, p: int = 16, m_i: int = 2,
                       lam: float = 5e-6, feasible_set: FeasibleSet | None = None) -> RidgeProblem:
    """Draw a ridge instance.

    ``x0`` holds each agent's first decision ``x_{i,1}`` (shape ``(n, p)``)
    or is a callable returning it. When ``None``, a hidden target drawn
    uniformly from half the feasible box is shared by all agents.
    """
    X = feasible_set if feasible_set is not None else FeasibleSet.cube(2.0, p)
    streams = Streams(seed)
    rng = streams(Purpose.DATA)
    a = rng.uniform(-5.0, 5.0, size=(T, n, p))
    upsilon = rng.uniform(0.0, 1.0, size=(T, n))
    B = rng.uniform(0.0, 2.0, size=(T, n, m_i, p))
    b = rng.uniform(0.0, 1.0, size=(T, n, m_i))
    if callable(x0):
        x0 = x0()
    if x0 is None:
        target = 0.5 * X.inner_radius * streams(Purpose.TARGET).uniform(-1.0, 1.0, size=p)
        x0 = np.tile(target, (n, 1))
    x0 = np.asarray(x0, dtype=float)
    if x0.shape != (n, p):
        raise ValueError(f"x0 must have shape ({n}, {p}), got {x0.shape}")
    return RidgeProblem(a, B, b, upsilon, x0, lam, X)
