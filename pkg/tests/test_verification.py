import copy
import math

import numpy as np
import pytest

from banditpd.algorithm import run
from banditpd.graphs import GraphProcess
from banditpd.problems import make_ridge_problem
from banditpd.schedule import make_schedule
from banditpd.verification import (
    check_constraint_sandwich,
    check_dual_bound,
    check_feasibility,
    check_jacobian_unbiasedness,
    check_mixing_mean,
    check_sandwich,
    check_trace_estimator_bounds,
    check_unbiasedness,
    estimator_battery,
)

A = np.array([0.7, -0.3, 1.2])
X0 = np.array([0.1, 0.2, -0.1])


def affine(y):
    return y @ A + 0.5


def l1(y):
    return np.abs(y).sum(axis=-1)


def test_affine_unbiased():
    rep = check_unbiasedness(affine, A, X0, 0.5, 1_000_000, seed=1)
    assert rep.passed and rep.checks[0].statistic <= 4.0


def test_constant_unbiased():
    assert check_unbiasedness(lambda y: np.full(len(y), 2.0), np.zeros(3), X0, 0.5, 200_000, seed=2).passed


def test_wrong_gradient_fails():
    assert not check_unbiasedness(affine, A + 0.1, X0, 0.5, 1_000_000, seed=1).passed


def test_low_power_flagged():
    rep = check_unbiasedness(affine, A, X0, 0.5, 1, seed=3)
    c = rep.checks[0]
    assert c.low_power and not c.passed and c.samples == 1
    assert "low power" in rep.to_text()


def test_jacobian_unbiased_and_negative():
    Bc = np.array([[1.0, 0.5, 0.2], [0.3, 0.1, 0.9]])

    def con(y):
        return y @ Bc.T + 10.0  # strictly positive near X0

    assert check_jacobian_unbiasedness(con, Bc.T, X0, 0.5, 500_000, seed=4).passed
    assert not check_jacobian_unbiasedness(con, 1.2 * Bc.T, X0, 0.5, 500_000, seed=4).passed


def test_sandwich_cases():
    assert check_sandwich(lambda y: np.full(len(y), 4.0), X0, 0.5, 0.0, 1000, seed=5).passed
    assert check_sandwich(l1, np.zeros(3), 0.5, math.sqrt(3), 100_000, seed=6).passed
    assert check_sandwich(l1, np.zeros(3), 1e-6, math.sqrt(3), 100_000, seed=7).passed
    # with F2 = 0 the smoothed l1 at a kink leaves the band
    assert not check_sandwich(l1, np.zeros(3), 0.5, 0.0, 100_000, seed=6).passed
    # concave f violates the lower side
    assert not check_sandwich(lambda y: -l1(y), np.zeros(3), 0.5, math.sqrt(3), 100_000, seed=8).passed


def test_constraint_sandwich():
    Bk = np.array([[1.0, -1.0, 0.5]])

    def kinked(y):
        return y @ Bk.T

    F2 = float(np.linalg.norm(Bk))
    assert check_constraint_sandwich(kinked, [1.5], np.zeros(3), 0.5, F2, 100_000, seed=9).passed
    with pytest.raises(ValueError):
        check_constraint_sandwich(kinked, [-1.0], np.zeros(3), 0.5, F2, 10, seed=9)


def test_reports_are_deterministic():
    a = check_unbiasedness(affine, A, X0, 0.5, 50_000, seed=11)
    b = check_unbiasedness(affine, A, X0, 0.5, 50_000, seed=11)
    assert a.to_kv() == b.to_kv()
    assert "check=unbiasedness" in a.to_kv() and "passed=1" in a.to_kv()


def test_battery_small():
    rep = estimator_battery(seed=0, N=100_000, dims=(2, 4), sandwich_N=20_000)
    assert rep.passed, rep.to_text()
    names = {c.name for c in rep.checks}
    assert {"unbiased-affine-p2", "unbiased-quadratic-p4", "sandwich-l1-p2"} <= names


@pytest.fixture(scope="module")
def run_fixture():
    T, n, p = 200, 4, 3
    prob = make_ridge_problem(n, T, 0, p=p)
    sched = make_schedule("corollary1", r=2.0, p=p, F1=prob.F1, g=0.1, horizon=T)
    return prob, sched, run(prob, GraphProcess(n, 0.3, 0), sched, 0)


def test_dual_bound_fresh_and_run(run_fixture):
    prob, sched, tr = run_fixture
    fresh = copy.deepcopy(tr)
    fresh.q[:] = 0.0
    assert check_dual_bound(fresh, sched, prob.F1).passed
    assert check_dual_bound(tr, sched, prob.F1).passed


def test_dual_bound_negative(run_fixture):
    prob, sched, tr = run_fixture
    bad = copy.deepcopy(tr)
    t = 50
    bad.q[t - 1, 2] = 0.0
    bad.q[t - 1, 2, 0] = prob.F1 / sched.beta(t) * (1 + 1e-6)
    rep = check_dual_bound(bad, sched, prob.F1)
    assert not rep.passed and "violations=1" in rep.checks[0].detail


def test_feasibility_and_negative(run_fixture):
    prob, sched, tr = run_fixture
    assert check_feasibility(tr, prob.feasible_set, sched).passed
    bad = copy.deepcopy(tr)
    bad.x[10, 1, 0] = 2.0 + 1e-9
    assert not check_feasibility(bad, prob.feasible_set, sched).passed
    bad = copy.deepcopy(tr)
    bad.e[10, 1, 0] = 2.0 * (1 - sched.xi(11)) + 1e-9
    assert not check_feasibility(bad, prob.feasible_set, sched).passed


def test_mixing_and_estimator_bounds(run_fixture):
    prob, sched, tr = run_fixture
    assert check_mixing_mean(tr).passed
    assert check_trace_estimator_bounds(tr, prob.F1).passed
    bad = copy.deepcopy(tr)
    bad.mix_mean_error[3] = 1e-9
    assert not check_mixing_mean(bad).passed
    bad.loss_values[4, 0] = prob.F1 * 2
    assert not check_trace_estimator_bounds(bad, prob.F1).passed
