"""Tests for Cartesian and warped product construction."""

import numpy as np
import pandas as pd
import pytest

from warpkit.dsolver import oracle_D
from warpkit.metric_space import circle_space, interval_space, load_space, shortest_paths
from warpkit.products import (
    build_cartesian,
    build_warped,
    export_product,
    node_frame,
    node_lookup,
    product_distances,
    segment_length,
    warped_length,
)
from warpkit.warp_profile import CompatibilityError, WarpFunction, WarpProfile, cone_profile, cylinder_profile


def test_smallest_square():
    square = build_cartesian(interval_space(2), (0.0, 1.0), 2)
    assert square.node_count == 4
    assert square.is_cartesian
    assert product_distances(square).distance(0, 3) == pytest.approx(np.sqrt(2.0))


def test_square_measure_and_diagonal(square8):
    assert square8.node_count == 81
    assert square8.measure.sum() == pytest.approx(1.0)
    corner = node_lookup(square8, 8, 8).node
    assert product_distances(square8, [0]).distance(0, corner) == pytest.approx(np.sqrt(2.0))


def test_axis_stencil_is_manhattan():
    square = build_cartesian(interval_space(5), (0.0, 1.0), 5, stencil='axis')
    corner = node_lookup(square, 4, 4).node
    assert product_distances(square, [0]).distance(0, corner) == pytest.approx(2.0)


def test_cone_apex_collapses(cone16):
    assert cone16.apex_levels == (0,)
    assert cone16.node_count == 1 + 15 * 16
    info = node_lookup(cone16, 0, 5)
    assert info.members == tuple(range(16))
    assert info.t == 0.0
    assert cone16.measure[info.node] == 0.0
    assert cone16.is_apex[info.node]
    assert cone16.node_vertex[info.node] == 0


def test_warped_measure_totals(cone16, cylinder16):
    # trapezoid weights integrate linear w_m exactly
    assert cone16.measure.sum() == pytest.approx(np.pi)
    assert cylinder16.measure.sum() == pytest.approx(2 * np.pi)


def test_suspension_has_two_apices(suspension16):
    assert suspension16.apex_levels == (0, 16)
    assert suspension16.node_count == 2 + 15 * 16


def test_projection_to_interval_is_one_lipschitz(cone16):
    distances = product_distances(cone16, [0, 100]).values
    for row, source in zip(distances, (0, 100)):
        assert (row + 1e-12 >= np.abs(cone16.node_t - cone16.node_t[source])).all()


def test_wide_stencil_close_to_cone_oracle():
    cone = build_warped(circle_space(32), cone_profile(32), stencil='wide')
    p = node_lookup(cone, 31, 0).node
    q = node_lookup(cone, 31, 8).node
    graph = product_distances(cone, [p]).distance(p, q)
    exact = oracle_D('cone', 1.0, 1.0, np.pi / 2)
    assert exact * 0.99 <= graph <= exact * 1.03


def test_cylinder_refinement_by_stencil():
    base = circle_space(64, circumference=1.0)
    base_dist = shortest_paths(base)
    profile = cylinder_profile(64)
    rng = np.random.default_rng(0)
    pairs = [rng.choice(64 * 64, size=2, replace=False) for _ in range(100)]

    worst = {}
    for stencil in ('diagonal', 'wide'):
        product = build_warped(base, profile, stencil=stencil)
        distances = product_distances(product, np.unique([p for p, _ in pairs]))
        errors = []
        for p, q in pairs:
            ell = base_dist.distance(product.node_vertex[p], product.node_vertex[q])
            exact = oracle_D('flat', product.node_t[p], product.node_t[q], ell)
            errors.append((distances.distance(p, q) - exact) / exact)
        # edge lengths are exact on the cylinder, so the graph never undercuts
        assert min(errors) >= -1e-9
        worst[stencil] = max(errors)

    assert worst['wide'] <= 0.02
    # octile bias of 8-neighbour paths on near-square cells
    assert worst['diagonal'] <= 0.09


def test_incompatible_profile_rejected():
    profile = WarpProfile((0.0, 1.0), 5, WarpFunction('linear'), WarpFunction('constant'))
    with pytest.raises(CompatibilityError):
        build_warped(circle_space(8), profile)


def test_bad_arguments(cone16):
    with pytest.raises(ValueError, match="unknown stencil"):
        build_warped(circle_space(8), cone_profile(8), stencil='hex')
    with pytest.raises(ValueError, match="reach"):
        build_warped(circle_space(8), cone_profile(8), stencil='wide', level_reach=0)
    with pytest.raises(ValueError, match="level 16 out of range"):
        node_lookup(cone16, 16, 0)
    with pytest.raises(ValueError, match="base vertex"):
        node_lookup(cone16, 3, -1)


def test_segment_length():
    flat = cylinder_profile(5)
    assert segment_length(flat, 0.0, 1.0, 0.0) == pytest.approx(1.0)
    assert segment_length(flat, 0.0, 0.3, 0.4) == pytest.approx(0.5)
    # w_d = t on a horizontal segment at t = 0.5
    assert segment_length(cone_profile(5), 0.5, 0.5, 2.0) == pytest.approx(1.0)


def test_warped_length_polyline():
    base_dist = shortest_paths(circle_space(4, circumference=4.0))
    curve = [(0.0, 0), (0.3, 0), (0.3, 2)]
    assert warped_length(cylinder_profile(5), base_dist, curve) == pytest.approx(2.3)
    assert warped_length(cylinder_profile(5), base_dist, curve[:1]) == 0.0


def test_export_product(tmp_path, cone16):
    space_path, sidecar = export_product(cone16, tmp_path / "cone.json")
    assert sidecar.name == "cone_nodes.csv"
    frame = pd.read_csv(sidecar)
    assert list(frame.columns) == ['node', 'level', 't', 'base_vertex']
    assert len(frame) == 16 * 16
    assert frame.loc[frame['level'] == 0, 'node'].nunique() == 1
    pd.testing.assert_frame_equal(frame, node_frame(cone16), check_dtype=False)
    # the null apex keeps the export from loading as a strict space
    with pytest.raises(ValueError, match="nonpositive measure"):
        load_space(space_path)
