"""Shared pytest fixtures: small spaces, profiles and products."""

import json

import numpy as np
import pytest

from warpkit.metric_space import circle_space, interval_space
from warpkit.products import build_cartesian, build_warped
from warpkit.warp_profile import cone_profile, cylinder_profile, suspension_profile


def pytest_configure(config):
    config.addinivalue_line("markers", "slow: full-resolution acceptance runs")


@pytest.fixture
def path_document():
    return {
        "name": "path3",
        "vertices": 3,
        "edges": [[0, 1, 1.0], [1, 2, 2.0]],
        "measure": [1.0, 1.0, 1.0],
    }


@pytest.fixture
def write_json(tmp_path):
    def _write(document, name="doc.json"):
        path = tmp_path / name
        path.write_text(json.dumps(document))
        return path
    return _write


@pytest.fixture
def circle16():
    return circle_space(16)


@pytest.fixture
def square8():
    return build_cartesian(interval_space(9), (0.0, 1.0), 9, stencil='diagonal')


@pytest.fixture
def cone16():
    return build_warped(circle_space(16), cone_profile(16), stencil='diagonal')


@pytest.fixture
def cylinder16():
    return build_warped(circle_space(16), cylinder_profile(16), stencil='diagonal')


@pytest.fixture
def suspension16():
    return build_warped(circle_space(16), suspension_profile(17), stencil='diagonal')


@pytest.fixture
def rng():
    return np.random.default_rng(0)
