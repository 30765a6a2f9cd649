"""Tests for the D solver, its oracles and ball radii."""

import numpy as np
import pytest

from warpkit.dsolver import (
    GeodesicQuery,
    ball_radius,
    oracle_D,
    solve_batch,
    solve_D,
    warped_distance,
)
from warpkit.metric_space import circle_space, shortest_paths
from warpkit.warp_profile import cone_profile, cylinder_profile, suspension_profile


@pytest.fixture(scope="module")
def cone():
    return cone_profile(64)


@pytest.fixture(scope="module")
def suspension():
    return suspension_profile(65)


def test_flat_plane_pythagoras():
    value = solve_D(cylinder_profile(2, (0.0, 3.0)), GeodesicQuery(0.0, 3.0, 4.0)).value
    assert value == pytest.approx(5.0, rel=5e-3)


@pytest.mark.parametrize("t0, t1, ell, expected", [
    (1.0, 1.0, np.pi / 2, np.sqrt(2.0)),
    (1.0, 1.0, 4.0, 2.0),
    (0.5, 1.0, 1.0, oracle_D('cone', 0.5, 1.0, 1.0)),
])
def test_cone_matches_unrolling(cone, t0, t1, ell, expected):
    assert solve_D(cone, GeodesicQuery(t0, t1, ell)).value == pytest.approx(expected, rel=5e-3)


def test_suspension_matches_sphere(suspension):
    value = solve_D(suspension, GeodesicQuery(np.pi / 2, np.pi / 2, np.pi / 2)).value
    assert value == pytest.approx(np.pi / 2, rel=5e-3)


def test_zero_ell_short_circuit(cone):
    solution = solve_D(cone, GeodesicQuery(0.25, 0.75, 0.0))
    assert solution.value == 0.5
    np.testing.assert_array_equal(solution.path, [[0.25, 0.0], [0.75, 0.0]])


def test_symmetry_is_exact(cone):
    forward = solve_D(cone, GeodesicQuery(0.2, 0.9, 1.3, (64, 64)))
    backward = solve_D(cone, GeodesicQuery(0.9, 0.2, 1.3, (64, 64)))
    assert forward.value == backward.value


def test_bounds_and_endpoints(cone):
    for t0, t1, ell in [(0.1, 0.9, 0.5), (0.7, 0.3, 2.0), (1.0, 1.0, 3.5)]:
        solution = solve_D(cone, GeodesicQuery(t0, t1, ell, (64, 64)))
        assert solution.value >= abs(t1 - t0)
        assert solution.value <= abs(t1 - t0) + ell * cone.wd_samples.max() + 1e-9
        np.testing.assert_allclose(solution.path[0], [t0, 0.0], atol=1e-12)
        np.testing.assert_allclose(solution.path[-1], [t1, ell], atol=1e-12)


def test_monotone_in_ell(cone):
    queries = [GeodesicQuery(0.4, 0.8, ell, (64, 64)) for ell in np.linspace(0.0, 3.0, 13)]
    values = [solution.value for solution in solve_batch(cone, queries)]
    assert all(b >= a - 1e-6 for a, b in zip(values, values[1:]))


def test_refinement_does_not_increase_error(cone):
    exact = oracle_D('cone', 0.6, 0.9, 1.1)
    coarse = solve_D(cone, GeodesicQuery(0.6, 0.9, 1.1, (32, 32))).value
    fine = solve_D(cone, GeodesicQuery(0.6, 0.9, 1.1, (128, 128))).value
    assert abs(fine - exact) <= abs(coarse - exact) + 1e-4


@pytest.mark.parametrize("kind, t0, t1, ell", [
    ('cone', 46 / 63, 55 / 63, 2.7489),
    ('suspension', 2 * np.pi / 63, 4 * np.pi / 63, 2.4544),
    ('suspension', 45 * np.pi / 63, 49 * np.pi / 63, 0.0982),
])
def test_solver_matches_oracle_at_full_resolution(kind, t0, t1, ell):
    # the first two grid paths detour through the apex at length t0 + t1
    profile = cone_profile(64) if kind == 'cone' else suspension_profile(64)
    exact = oracle_D(kind, t0, t1, ell)
    value = solve_D(profile, GeodesicQuery(t0, t1, ell, (256, 256))).value
    assert value == pytest.approx(exact, rel=5e-3)


def test_query_validation(cone):
    with pytest.raises(ValueError, match="nonnegative"):
        GeodesicQuery(0.0, 1.0, -1.0)
    with pytest.raises(ValueError, match="resolution"):
        GeodesicQuery(0.0, 1.0, 1.0, (1, 64))
    with pytest.raises(ValueError, match="outside the interval"):
        solve_D(cone, GeodesicQuery(0.0, 1.5, 1.0))


def test_oracles():
    assert oracle_D('flat', 0.0, 3.0, 4.0) == pytest.approx(5.0)
    assert oracle_D('cone', 1.0, 1.0, np.pi) == pytest.approx(2.0)
    assert oracle_D('cone', 1.0, 0.5, 5.0) == pytest.approx(1.5)
    assert oracle_D('suspension', np.pi / 2, np.pi / 2, np.pi) == pytest.approx(np.pi)
    with pytest.raises(ValueError, match="unknown oracle kind"):
        oracle_D('torus', 0.0, 1.0, 1.0)


def test_warped_distance_composition(cone):
    circle = circle_space(16)
    base_dist = shortest_paths(circle)
    assert warped_distance(base_dist, cylinder_profile(8), (0.0, 3), (1.0, 3)) == 1.0
    assert warped_distance(base_dist, cone, (1.0, 0), (1.0, 4)) == pytest.approx(np.sqrt(2.0), rel=5e-3)
    assert warped_distance(base_dist, cone, (1.0, 0), (0.0, 9)) == pytest.approx(1.0, rel=5e-3)


def test_ball_radius_flat_and_cone(cone):
    assert ball_radius(cylinder_profile(11), 0.5, 0.5, 0.1) == pytest.approx(0.1, abs=1e-3)
    assert ball_radius(cone, 1.0, 1.0, 0.1) == pytest.approx(2 * np.arcsin(0.05), abs=1e-3)


def test_ball_radius_edge_cases(cone):
    assert ball_radius(cone, 0.5, 0.75, 0.25) is None
    with pytest.raises(ValueError, match="w_d vanishes"):
        ball_radius(cone, 0.0, 0.05, 0.1)
