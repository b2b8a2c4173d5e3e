"""Distributed bandit online primal-dual projection with one-point sampling.

Round ``t`` (for ``t = 1 .. T-1``) of the algorithm, per agent ``i``:

1. mix neighbours' ``e_{j,t}`` with ``W_t`` into ``z_{i,t+1}``;
2. sample ``l_{i,t}`` and ``c_{i,t}`` at the played point ``x_{i,t}``;
3. build the one-point direction ``w = g_loss + J_con q_{i,t}``;
4. ``e_{i,t+1} = P_{(1 - xi_{t+1}) X}(z_{i,t+1} - alpha_{t+1} w)``;
5. draw ``u_{i,t+1}`` and play ``x_{i,t+1} = e_{i,t+1} + delta_{t+1} u_{i,t+1}``;
6. ``q_{i,t+1} = [(1 - beta_{t+1} gamma_{t+1}) q_{i,t} + gamma_{t+1} [c_{i,t}(x_{i,t})]_+]_+``.

At ``t = T`` the agents play and sample once more but do not update.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import bandit
from .geometry import FeasibleSet, project_nonneg, project_scaled
from .graphs import mix
from .rng import Purpose, Streams
from .schedule import ParameterSchedule

ESTIMATORS = ("one_point", "two_point")
SAMPLES_PER_ROUND = {"one_point": 2, "two_point": 4}


@dataclass(frozen=True)
class AgentState:
    e: np.ndarray
    x: np.ndarray
    u: np.ndarray
    q: np.ndarray
    t: int = 1
    last_loss_value: float = float("nan")
    last_constraint_values: np.ndarray = field(default_factory=lambda: np.zeros(0))
    samples_used: int = 0


def init_agents(n: int, feasible_set: FeasibleSet, sched: ParameterSchedule, m, seed: int,
                init: str = "origin") -> list[AgentState]:
    """Initial states: ``e`` at the origin (or uniform in ``(1 - xi_1) X``), ``q = 0``."""
    if n < 1:
        raise ValueError("need at least one agent")
    m = [m] * n if np.isscalar(m) else list(m)
    streams = Streams(seed)
    p = feasible_set.dim
    shrink = 1.0 - float(sched.xi(1))
    d1 = float(sched.delta(1))
    agents = []
    for i in range(n):
        if init == "origin":
            e = np.zeros(p)
        elif init == "uniform":
            rng = streams(Purpose.INIT, i, 1)
            if feasible_set.kind == "box":
                e = shrink * rng.uniform(feasible_set.lo, feasible_set.hi)
            else:
                e = shrink * feasible_set.radius * bandit.sample_unit_ball_batch(rng, 1, p)[0]
        else:
            raise ValueError(f"unknown init mode {init!r}")
        u = bandit.sample_unit_sphere(streams(Purpose.SPHERE, i, 1), p)
        agents.append(AgentState(e=e, x=e + d1 * u, u=u, q=np.zeros(m[i]), t=1))
    return agents


def agent_step(state: AgentState, z_next: np.ndarray, loss_value: float, constraint_values,
               sched: ParameterSchedule, t: int, rng: np.random.Generator,
               feasible_set: FeasibleSet, *, loss_value_minus: float | None = None,
               constraint_values_minus=None) -> AgentState:
    """Advance one agent from round ``t`` to ``t + 1``.

    ``loss_value`` and ``constraint_values`` are the samples at
    ``state.x``. Passing the ``*_minus`` samples (taken at
    ``e - delta u``) switches to the two-point estimators.
    """
    p = state.e.size
    cvals = np.atleast_1d(np.asarray(constraint_values, dtype=float))
    d = float(sched.delta(t))
    if loss_value_minus is None:
        g = bandit.estimate_loss_gradient(loss_value, d, state.u, p)
        J = bandit.estimate_constraint_jacobian(cvals, d, state.u, p)
    else:
        g = bandit.estimate_two_point(loss_value, loss_value_minus, d, state.u, p)
        J = bandit.estimate_two_point_jacobian(cvals, constraint_values_minus, d, state.u, p)
    direction = g.g + J.J @ state.q
    t1 = t + 1
    e_next = project_scaled(feasible_set, 1.0 - float(sched.xi(t1)),
                            z_next - float(sched.alpha(t1)) * direction)
    u_next = bandit.sample_unit_sphere(rng, p)
    x_next = e_next + float(sched.delta(t1)) * u_next
    bg = float(sched.beta(t1) * sched.gamma(t1))
    q_next = project_nonneg((1.0 - bg) * state.q + float(sched.gamma(t1)) * project_nonneg(cvals))
    return AgentState(e=e_next, x=x_next, u=u_next, q=q_next, t=t1, last_loss_value=float(loss_value),
                      last_constraint_values=cvals,
                      samples_used=state.samples_used + g.samples_used + J.samples_used)


class RoundTrace:
    """Append-only per-round record of a run. Arrays are indexed ``[t - 1, i, ...]``."""

    def __init__(self, T: int, n: int, p: int, m: list[int], seed: int, estimator: str):
        mmax = max(m) if m else 0
        self.T, self.n, self.p, self.m = T, n, p, list(m)
        self.seed = seed
        self.estimator = estimator
        self.stream_scheme = "philox(seed, purpose<<56|agent<<32|round)"
        self.x = np.zeros((T, n, p))
        self.e = np.zeros((T, n, p))
        self.q = np.zeros((T, n, mmax))
        self.loss_values = np.zeros((T, n))
        self.constraint_values = np.zeros((T, n, mmax))
        self.samples = np.zeros((T, n), dtype=np.int64)
        self.mix_mean_error = np.zeros(T)
        self.length = 0

    def append(self, agents: list[AgentState], loss_values, constraint_values, samples,
               mix_mean_error: float) -> None:
        k = self.length
        if k >= self.T:
            raise IndexError("trace is full")
        for i, s in enumerate(agents):
            self.x[k, i] = s.x
            self.e[k, i] = s.e
            self.q[k, i, : s.q.size] = s.q
            self.constraint_values[k, i, : len(constraint_values[i])] = constraint_values[i]
        self.loss_values[k] = loss_values
        self.samples[k] = samples
        self.mix_mean_error[k] = mix_mean_error
        self.length += 1

    def __len__(self):
        return self.length


def _sample(problem, t: int, points: np.ndarray) -> tuple[np.ndarray, list[np.ndarray]]:
    if hasattr(problem, "local_losses"):
        lv = problem.local_losses(t, points)
        cv = problem.local_constraints(t, points)
        return lv, list(cv)
    lv = np.array([problem.loss(i, t, points[i]) for i in range(problem.n)])
    cv = [problem.constraint(i, t, points[i]) for i in range(problem.n)]
    return lv, cv


def run(problem, graphs: Callable[[int], tuple], sched: ParameterSchedule, seed: int,
        T: int | None = None, *, agents: list[AgentState] | None = None,
        estimator: str = "one_point", init: str = "origin") -> RoundTrace:
    """Run the algorithm for ``T`` rounds and return the full trace.

    ``graphs(t)`` returns ``(GraphRound, W_t)``. The result is a
    deterministic function of ``seed`` and the arguments.
    """
    T = problem.T if T is None else T
    if T < 2:
        raise ValueError("need T >= 2")
    if T > problem.T:
        raise ValueError(f"problem only defines {problem.T} rounds, asked for {T}")
    if estimator not in ESTIMATORS:
        raise ValueError(f"unknown estimator {estimator!r}")
    n, p, X = problem.n, problem.p, problem.feasible_set
    if agents is None:
        agents = init_agents(n, X, sched, problem.m, seed, init)
    if len(agents) != n or agents[0].e.size != p:
        raise ValueError("agent states do not match the problem dimensions")
    streams = Streams(seed)
    trace = RoundTrace(T, n, p, problem.m, seed, estimator)
    per_round = SAMPLES_PER_ROUND[estimator]
    samples = np.array([a.samples_used for a in agents], dtype=np.int64)
    for t in range(1, T + 1):
        E = np.array([a.e for a in agents])
        Xp = np.array([a.x for a in agents])
        lv, cv = _sample(problem, t, Xp)
        if estimator == "two_point":
            d = float(sched.delta(t))
            lv_m, cv_m = _sample(problem, t, E - d * np.array([a.u for a in agents]))
        samples = samples + per_round
        if t == T:
            trace.append(agents, lv, cv, samples, 0.0)
            break
        _, W = graphs(t)
        Z = mix(W, E)
        err = float(np.max(np.abs(Z.mean(axis=0) - E.mean(axis=0))))
        trace.append(agents, lv, cv, samples, err)
        nxt = []
        for i, a in enumerate(agents):
            rng = streams(Purpose.SPHERE, i, t + 1)
            if estimator == "two_point":
                s = agent_step(a, Z[i], lv[i], cv[i], sched, t, rng, X,
                               loss_value_minus=lv_m[i], constraint_values_minus=cv_m[i])
            else:
                s = agent_step(a, Z[i], lv[i], cv[i], sched, t, rng, X)
            nxt.append(s)
        agents = nxt
    return trace
