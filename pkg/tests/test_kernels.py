"""The numba kernels and their numpy fallbacks agree."""
import numpy as np
import pytest

from porous_carnot import kernels

pytestmark = pytest.mark.skipif(not kernels.USE_NUMBA, reason="numba disabled")


def test_koranyi(rng):
    a, b = rng.uniform(-2, 2, (2, 5000, 3))
    assert np.array_equal(kernels.koranyi_dist_np(a, b), kernels.koranyi_dist_nb(a, b))


def test_ladder_and_cantor_gaps(rng):
    r = np.concatenate([rng.uniform(0, 1.2, 5000), [0.0, 0.5, 0.75, 1.0, 0.3125]])
    assert np.array_equal(kernels.ladder_gap_np(r), kernels.ladder_gap_nb(r))
    u = np.concatenate([rng.uniform(-0.2, 1.2, 5000), [0.0, 0.25, 1.0, 0.5]])
    assert np.array_equal(kernels.cantor_gap_np(u), kernels.cantor_gap_nb(u))


@pytest.mark.parametrize("code", [0, 1])
def test_ball_gap(code, rng):
    pts = rng.uniform(-1, 1, (4000, 3))
    centers = rng.uniform(-1, 1, (700, 3))
    radii = rng.uniform(1e-3, 0.05, 700)
    g_np, i_np = kernels.ball_nearest_np(code, pts, centers, radii)
    g_nb, i_nb = kernels.BallIndex(code, centers, radii).query(pts)
    assert np.allclose(g_np, g_nb, rtol=0, atol=1e-15)


def test_overlaps_reports_pair():
    c = np.array([[0.0, 0, 0], [0.15, 0, 0], [0.5, 0, 0]])
    r = np.array([0.1, 0.1, 0.1])
    pairs, n = kernels.overlaps(0, c, r)
    assert n == 1 and sorted(map(int, pairs[0])) == [0, 1]
