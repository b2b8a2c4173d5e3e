import numpy as np
import pytest

from banditpd.algorithm import AgentState, agent_step, init_agents, run
from banditpd.geometry import FeasibleSet, project_scaled
from banditpd.graphs import GraphProcess, GraphRound, mixing_from_graph
from banditpd.problems import make_ridge_problem
from banditpd.rng import Purpose, substream
from banditpd.schedule import make_schedule
from banditpd.verification import check_dual_bound, check_feasibility, check_mixing_mean

X4 = FeasibleSet.cube(2.0, 4)


class FixedSchedule:
    """Constant schedule values, for hand-checkable single steps."""

    def __init__(self, alpha=0.1, beta=0.5, gamma=1.0, xi=0.5, delta=0.5):
        self.vals = dict(alpha=alpha, beta=beta, gamma=gamma, xi=xi, delta=delta)

    def __getattr__(self, name):
        if name in ("alpha", "beta", "gamma", "xi", "delta"):
            return lambda t: self.vals[name]
        raise AttributeError(name)


def _state(q, p=2):
    u = np.zeros(p)
    u[0] = 1.0
    return AgentState(e=np.zeros(p), x=0.5 * u, u=u, q=np.asarray(q, float))


def test_dual_rest():
    s = agent_step(_state([0.0, 0.0]), np.zeros(2), 1.0, [-0.3, 0.0], FixedSchedule(), 1,
                   substream(0, Purpose.SPHERE), FeasibleSet.cube(2.0, 2))
    np.testing.assert_array_equal(s.q, [0.0, 0.0])


def test_dual_update_example():
    s = agent_step(_state([1.0]), np.zeros(2), 0.0, [0.2], FixedSchedule(beta=0.5, gamma=1.0), 1,
                   substream(0, Purpose.SPHERE), FeasibleSet.cube(2.0, 2))
    assert s.q[0] == pytest.approx(0.7, abs=1e-15)


def test_zero_estimates_project_mixed_point():
    X = FeasibleSet.cube(2.0, 2)
    z = np.array([1.9, -0.4])
    s = agent_step(_state([0.4]), z, 0.0, [-1.0], FixedSchedule(xi=0.25), 1, substream(0, Purpose.SPHERE), X)
    np.testing.assert_array_equal(s.e, project_scaled(X, 0.75, z))
    assert s.t == 2 and s.samples_used == 2


def test_primal_step_by_hand():
    X = FeasibleSet.cube(2.0, 2)
    sched = FixedSchedule(alpha=0.01, xi=0.1, delta=0.5)
    st = _state([2.0])
    # g = (2/0.5)*3*u = (12,0); J col = (2/0.5)*0.5*u = (2,0); w = (12+4, 0)
    s = agent_step(st, np.array([0.5, 0.5]), 3.0, [0.5], sched, 1, substream(1, Purpose.SPHERE), X)
    np.testing.assert_allclose(s.e, [0.5 - 0.16, 0.5], atol=1e-15)
    np.testing.assert_allclose(np.linalg.norm(s.x - s.e), 0.5, atol=1e-15)


def test_init_agents():
    sched = make_schedule("corollary1", r=2.0, p=16, F1=100.0, g=0.1)
    X = FeasibleSet.cube(2.0, 16)
    agents = init_agents(5, X, sched, 2, seed=3)
    for a in agents:
        np.testing.assert_array_equal(a.q, np.zeros(2))
        assert np.linalg.norm(a.x) == pytest.approx(2.0 / 2 ** 0.25, rel=1e-14)
        assert X.contains(a.x)
    for a in init_agents(5, X, sched, 2, seed=3, init="uniform"):
        assert X.contains(a.e, 1.0 - sched.xi(1)) and X.contains(a.x)


def _identity_graphs(n):
    g = GraphRound(n, frozenset())
    W = mixing_from_graph(g)
    return lambda t: (g, W)


def test_two_rounds_single_agent():
    prob = make_ridge_problem(1, 2, seed=0, p=3)
    sched = make_schedule("corollary1", r=2.0, p=3, F1=prob.F1, g=0.1)
    tr = run(prob, _identity_graphs(1), sched, seed=0)
    assert len(tr) == 2
    assert tr.samples[-1, 0] == 4


def _small(seed, T=200, n=4, p=3):
    prob = make_ridge_problem(n, T, seed=seed, p=p)
    sched = make_schedule("corollary1", r=2.0, p=p, F1=prob.F1, g=0.1, horizon=T)
    return prob, sched, GraphProcess(n, 0.3, seed)


@pytest.mark.parametrize("estimator", ["one_point", "two_point"])
def test_deterministic(estimator):
    prob, sched, gp = _small(4)
    a = run(prob, gp, sched, 4, estimator=estimator)
    b = run(prob, GraphProcess(4, 0.3, 4), sched, 4, estimator=estimator)
    for name in ("x", "e", "q", "loss_values", "constraint_values", "samples"):
        assert np.array_equal(getattr(a, name), getattr(b, name))
    c = run(prob, gp, sched, 5, estimator=estimator)
    assert not np.array_equal(a.x, c.x)


def test_sample_counts():
    prob, sched, gp = _small(1, T=50)
    one = run(prob, gp, sched, 1)
    two = run(prob, gp, sched, 1, estimator="two_point")
    t = np.arange(1, 51)
    assert np.array_equal(one.samples, np.repeat((2 * t)[:, None], 4, axis=1))
    assert np.array_equal(two.samples, 2 * one.samples)


def test_rejects_bad_arguments():
    prob, sched, gp = _small(0, T=5)
    with pytest.raises(ValueError):
        run(prob, gp, sched, 0, T=1)
    with pytest.raises(ValueError):
        run(prob, gp, sched, 0, T=6)
    with pytest.raises(ValueError):
        run(prob, gp, sched, 0, estimator="three_point")


def test_invariant_sweep():
    n, p, T = 10, 4, 1000
    prob = make_ridge_problem(n, T, seed=2, p=p)
    sched = make_schedule("corollary1", r=2.0, p=p, F1=prob.F1, g=0.1, horizon=T)
    tr = run(prob, GraphProcess(n, 0.1, 2), sched, 2)
    assert check_dual_bound(tr, sched, prob.F1).passed
    assert check_feasibility(tr, prob.feasible_set, sched).passed
    assert check_mixing_mean(tr).passed
    assert np.all(tr.q >= 0)
    # with a small F1 override the dual variables are exercised hard and still obey the bound
    tight = make_schedule("corollary1", r=2.0, p=p, F1=1.0, g=0.1, horizon=T)
    tr2 = run(prob, GraphProcess(n, 0.1, 2), tight, 2)
    assert tr2.q.max() > 0
    assert check_feasibility(tr2, prob.feasible_set, tight).passed
    assert check_mixing_mean(tr2).passed
