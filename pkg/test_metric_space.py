"""Tests for finite metric measure spaces."""

import json

import numpy as np
import pytest

from warpkit.metric_space import (
    DistanceMatrix,
    MetricMeasureSpace,
    ball_measure,
    circle_space,
    diameter,
    doubling_ratio,
    generate,
    interval_space,
    lipschitz_constant,
    load_space,
    local_slope,
    random_geometric_space,
    save_space,
    shortest_paths,
    unique_edges,
    validate_space,
)


def test_load_path_file(path_document, write_json):
    space = load_space(write_json(path_document))
    assert space.vertex_count == 3
    assert shortest_paths(space).distance(0, 2) == pytest.approx(3.0)


@pytest.mark.parametrize("edit, message", [
    (lambda d: d["edges"].__setitem__(0, [0, 1, 0.0]), "nonpositive edge length at edge (0,1)"),
    (lambda d: d["measure"].__setitem__(1, -1.0), "nonpositive measure at vertex 1"),
    (lambda d: d.__setitem__("edges", [[0, 1, 1.0]]), "graph is disconnected (2 components)"),
    (lambda d: d["edges"].append([1, 0, 3.0]), "duplicate edge (0,1)"),
    (lambda d: d["edges"].append([2, 2, 1.0]), "self-loop at vertex 2"),
    (lambda d: d["edges"].append([2, 5, 1.0]), "references a missing vertex"),
])
def test_load_rejects_invalid_files(path_document, write_json, edit, message):
    edit(path_document)
    with pytest.raises(ValueError) as excinfo:
        load_space(write_json(path_document))
    assert message in str(excinfo.value)


def test_load_missing_and_malformed(tmp_path):
    with pytest.raises(FileNotFoundError):
        load_space(tmp_path / "nope.json")
    bad = tmp_path / "bad.json"
    bad.write_text("{not json")
    with pytest.raises(ValueError, match="could not parse"):
        load_space(bad)


def test_validate_space_returns_tuple():
    ok, msg = validate_space(2, np.array([[0, 1]]), np.array([1.0]), np.ones(2))
    assert ok and msg is None
    ok, msg = validate_space(2, np.array([[0, 1]]), np.array([1.0]), np.array([1.0, 0.0]), strict_measure=False)
    assert ok


def test_unique_edges_keeps_shortest_parallel_edge():
    edges, lengths = unique_edges([0, 1, 2], [1, 0, 2], [2.0, 1.5, 9.0])
    assert edges.tolist() == [[0, 1]]
    assert lengths.tolist() == [1.5]


def test_save_roundtrip_keeps_distances(tmp_path, circle16):
    path = tmp_path / "circle.json"
    save_space(circle16, path)
    loaded = load_space(path)
    assert json.loads(path.read_text())["vertices"] == 16
    np.testing.assert_allclose(shortest_paths(loaded).values, shortest_paths(circle16).values)


def test_circle_distances_are_arcs():
    space = circle_space(8, circumference=8.0)
    d = shortest_paths(space)
    assert d.distance(0, 4) == pytest.approx(4.0)
    assert d.distance(1, 7) == pytest.approx(2.0)
    assert diameter(space) == pytest.approx(4.0)
    assert space.total_measure == pytest.approx(8.0)


def test_interval_measure_is_trapezoid():
    space = interval_space(5, length=2.0)
    np.testing.assert_allclose(space.measure, [0.25, 0.5, 0.5, 0.5, 0.25])
    assert space.coordinates.shape == (5, 1)


def test_distance_matrix_is_metric(circle16):
    ok, msg = shortest_paths(circle16).check_metric()
    assert ok, msg


def test_check_metric_detects_broken_triangle():
    values = np.array([[0.0, 1.0, 5.0], [1.0, 0.0, 1.0], [5.0, 1.0, 0.0]])
    ok, msg = DistanceMatrix(values=values, sources=np.arange(3)).check_metric()
    assert not ok
    assert "triangle" in msg


def test_partial_distance_matrix_uses_symmetry(circle16):
    d = shortest_paths(circle16, sources=[3])
    assert not d.is_complete
    assert d.distance(5, 3) == d.distance(3, 5)
    with pytest.raises(KeyError):
        d.distance(0, 1)


def test_ball_measure_is_open(circle16):
    step = 2 * np.pi / 16
    assert ball_measure(circle16, 0, step) == pytest.approx(step)
    assert ball_measure(circle16, 0, step * 1.25) == pytest.approx(3 * step)
    assert doubling_ratio(circle16, 0, step * 1.25) == pytest.approx(5 / 3)


def test_local_slope_and_lipschitz():
    space = interval_space(5)
    values = np.array([0.0, 0.25, 0.5, 1.0, 1.0])
    np.testing.assert_allclose(local_slope(space, values), [1.0, 1.0, 2.0, 2.0, 0.0])
    assert lipschitz_constant(space, values) == pytest.approx(2.0)


def test_random_geometric_is_connected_and_seeded():
    first = random_geometric_space(30, 0.1, seed=3)
    second = random_geometric_space(30, 0.1, seed=3)
    np.testing.assert_array_equal(first.edges, second.edges)
    assert (first.lengths > 0).all()


def test_generate_dispatch_and_errors():
    assert generate("circle", n=5).vertex_count == 5
    with pytest.raises(ValueError, match="unknown space kind"):
        generate("torus", n=5)
    with pytest.raises(ValueError, match="invalid parameters"):
        generate("circle", n=5, radius=1.0)
    with pytest.raises(ValueError):
        circle_space(2)


def test_constructor_prefixes_name():
    with pytest.raises(ValueError, match="^tiny: "):
        MetricMeasureSpace(2, [[0, 1]], [-1.0], [1.0, 1.0], name="tiny")
