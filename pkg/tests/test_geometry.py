import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from hypothesis.extra.numpy import arrays

from banditpd.geometry import ContractViolation, FeasibleSet, project, project_nonneg, project_scaled

BOX2 = FeasibleSet.cube(2.0, 2)


def test_box_clamp():
    np.testing.assert_array_equal(project(BOX2, [3.0, -5.0]), [2.0, -2.0])


def test_ball_radial_scaling():
    np.testing.assert_allclose(project(FeasibleSet.ball(1.0, 2), [3.0, 4.0]), [0.6, 0.8], rtol=0, atol=1e-15)


@pytest.mark.parametrize("s", [BOX2, FeasibleSet.ball(1.5, 2)])
def test_feasible_point_unchanged(s):
    z = np.array([0.3, -0.7])
    np.testing.assert_array_equal(project(s, z), z)


def test_dimension_mismatch():
    with pytest.raises(ContractViolation):
        project(BOX2, [1.0, 2.0, 3.0])


def test_radii():
    s = FeasibleSet.cube(2.0, 16)
    assert s.inner_radius == 2.0
    assert s.outer_radius == pytest.approx(2.0 * 4.0)
    b = FeasibleSet.ball(0.7, 3)
    assert b.inner_radius == b.outer_radius == 0.7


def test_origin_must_be_interior():
    with pytest.raises(ContractViolation):
        FeasibleSet.box([0.0, -1.0], [1.0, 1.0])
    with pytest.raises(ContractViolation):
        FeasibleSet.ball(0.0, 2)


def test_project_scaled_examples():
    np.testing.assert_array_equal(project_scaled(FeasibleSet.cube(2.0, 1), 0.5, [3.0]), [1.0])
    np.testing.assert_array_equal(project_scaled(BOX2, 1.0, [3.0, -5.0]), [2.0, -2.0])
    for c in (0.1, 0.5, 1.0):
        np.testing.assert_array_equal(project_scaled(BOX2, c, np.zeros(2)), np.zeros(2))


@pytest.mark.parametrize("c", [0.0, -0.1, 1.0000001])
def test_project_scaled_rejects_bad_factor(c):
    with pytest.raises(ContractViolation):
        project_scaled(BOX2, c, [1.0, 1.0])


def test_project_nonneg():
    np.testing.assert_array_equal(project_nonneg([-1.0, 2.0]), [0.0, 2.0])
    np.testing.assert_array_equal(project_nonneg([0.0, 0.0]), [0.0, 0.0])
    np.testing.assert_array_equal(project_nonneg([-3.0, -4.0]), [0.0, 0.0])


def test_nonexpansive_random_pairs():
    rng = np.random.default_rng(0)
    for s in (FeasibleSet.cube(2.0, 5), FeasibleSet.ball(1.3, 5)):
        a = rng.normal(scale=4.0, size=(1000, 5))
        b = rng.normal(scale=4.0, size=(1000, 5))
        lhs = np.linalg.norm(project(s, a) - project(s, b), axis=1)
        rhs = np.linalg.norm(a - b, axis=1)
        assert np.all(lhs <= rhs + 1e-12)


vec3 = arrays(np.float64, 3, elements=st.floats(-50, 50))


@settings(max_examples=200, deadline=None)
@given(z=vec3, c=st.floats(1e-3, 1.0))
def test_scaling_identity_and_membership(z, c):
    s = FeasibleSet.box([-1.0, -2.0, -0.5], [3.0, 2.0, 0.5])
    out = project_scaled(s, c, z)
    assert np.array_equal(out, c * project(s, z / c))
    assert np.all(out >= c * s.lo - 1e-15) and np.all(out <= c * s.hi + 1e-15)


@settings(max_examples=200, deadline=None)
@given(z=vec3)
def test_idempotent(z):
    box = FeasibleSet.cube(1.0, 3)
    once = project(box, z)
    np.testing.assert_array_equal(project(box, once), once)
    ball = FeasibleSet.ball(2.0, 3)
    once = project(ball, z)
    np.testing.assert_allclose(project(ball, once), once, rtol=1e-15, atol=0)
    v = project_nonneg(z)
    np.testing.assert_array_equal(project_nonneg(v), v)


def test_project_is_closest_point_box():
    # brute force over a fine grid of the box
    s = FeasibleSet.box([-1.0, -0.5], [2.0, 1.0])
    grid = np.stack(np.meshgrid(np.linspace(-1, 2, 301), np.linspace(-0.5, 1, 151)), -1).reshape(-1, 2)
    for z in ([3.0, 3.0], [-4.0, 0.2], [0.5, -9.0]):
        best = grid[np.argmin(np.linalg.norm(grid - z, axis=1))]
        np.testing.assert_allclose(project(s, z), best, atol=1e-12)
