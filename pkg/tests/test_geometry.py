import math

import numpy as np
import pytest

from rsgp import geometry, kernels
from rsgp.errors import InvalidArgumentError, ResourceLimitError
from rsgp.kernels import KernelSpec


def test_endpoints():
    g = geometry.build_grid([[0, 1]], 2)
    assert g.points.ravel().tolist() == [0.0, 1.0]
    assert g.dist.tolist() == [[0.0, 1.0], [1.0, 0.0]]


def test_square_diagonal():
    g = geometry.build_grid([[0, 1], [0, 1]], 3)
    assert g.size == 9 and g.dim == 2
    assert g.dist[0, 8] == pytest.approx(math.sqrt(2))
    # row-major: the last coordinate varies fastest
    assert g.points[1].tolist() == [0.0, 0.5]


def test_lattice_distances_exactly_equal():
    g = geometry.build_grid([[0, 1]], 50)
    # six steps left and six steps right of index 7 are the same distance
    assert g.dist[7, 1] == g.dist[7, 13]
    assert np.allclose(g.dist, np.abs(g.points - g.points.T), rtol=1e-14, atol=1e-15)


def test_kernel_metric_grid_matches_loop():
    spec = KernelSpec("matern", (0.5,), nu=1.5)
    g = geometry.build_grid([[0, 1]], 6, metric="kernel", kernel=spec)
    for i in range(6):
        for j in range(6):
            assert g.dist[i, j] == pytest.approx(kernels.kernel_metric(spec, g.points[i], g.points[j]), abs=1e-12)


def test_kernel_metric_needs_kernel():
    with pytest.raises(InvalidArgumentError):
        geometry.build_grid([[0, 1]], 3, metric="kernel")


def test_budget_error_suggests_resolution():
    with pytest.raises(ResourceLimitError, match="resolution 31"):
        geometry.build_grid([[0, 1], [0, 1]], 100, max_points=1000)


@pytest.mark.parametrize("bounds, res", [([[1, 0]], 3), ([[0, 1]], 1)])
def test_bad_lattice(bounds, res):
    with pytest.raises(InvalidArgumentError):
        geometry.build_grid(bounds, res)


def test_needs_two_points():
    with pytest.raises(InvalidArgumentError):
        geometry.from_points([[0.0]])


def test_ball_examples():
    g = geometry.build_grid([[0, 1]], 3)
    assert geometry.ball(g, 0, 0.5).members.tolist() == [0, 1]
    assert geometry.ball(g, 1, 0.0).members.tolist() == [1]
    assert geometry.ball(g, 2, math.inf).members.tolist() == [0, 1, 2]
    with pytest.raises(InvalidArgumentError):
        geometry.ball(g, 0, -0.1)


def test_ball_monotone(rng):
    g = geometry.from_points(rng.uniform(0, 1, (25, 2)))
    for c in range(g.size):
        prev = set()
        for eps in np.linspace(0, 1.5, 12):
            cur = set(geometry.ball(g, c, eps).members.tolist())
            assert prev <= cur and c in cur
            prev = cur


def test_pseudometric_duplicates_kept():
    spec = KernelSpec("linear", (1.0,))
    g = geometry.from_points([[1.0, 0.0], [1.0, 0.0], [0.0, 1.0]], metric="kernel", kernel=spec)
    assert g.size == 3
    assert geometry.ball(g, 0, 0.0).members.tolist() == [0, 1]


def test_load_points_csv(tmp_path):
    p = tmp_path / "pts.csv"
    p.write_text("x,y\n0,0\n1,0.5\n")
    pts = geometry.load_points_csv(p)
    assert pts.tolist() == [[0.0, 0.0], [1.0, 0.5]]
