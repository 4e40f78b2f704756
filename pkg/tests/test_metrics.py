import numpy as np
import pytest

from porous_carnot.errors import UnsupportedMetric
from porous_carnot.group import euclidean_spec, heisenberg_spec, mul
from porous_carnot.metrics import (CCSettings, cc_estimate, koranyi_lower_bound, koranyi_norm, make_metric,
                                   snowflake)

H = heisenberg_spec()


def test_koranyi_examples():
    k = make_metric("koranyi", H)
    assert np.isclose(k.dist([0, 0, 0], [1, 0, 0]), 1.0)
    assert np.isclose(k.dist([0, 0, 0], [0, 0, 4]), 2.0)
    assert np.isclose(koranyi_norm(np.array([3.0, 4.0, 7.0])), 674 ** 0.25)


def test_lower_bound_examples():
    assert np.isclose(koranyi_lower_bound(np.array([3.0, 4.0, 7.0])), 5.0)
    assert koranyi_lower_bound(np.zeros(3)) == 0.0
    assert np.isclose(koranyi_lower_bound(np.array([0.0, 0.0, 1.0])), 1.0)


def test_koranyi_only_on_h1():
    with pytest.raises(UnsupportedMetric):
        make_metric("koranyi", euclidean_spec(3))


@pytest.mark.parametrize("kind", ["euclidean", "koranyi", "quasi-norm"])
def test_zero_distance(kind, rng):
    m = make_metric(kind, H)
    a = rng.uniform(-1, 1, (50, 3))
    assert np.all(m.dist(a, a) == 0)


def test_snowflake_examples(rng):
    s = snowflake(make_metric("euclidean", euclidean_spec(1)), 0.5)
    assert np.isclose(s.dist([0.0], [4.0]), 2.0)
    a, b, c = rng.uniform(-3, 3, (3, 10_000, 1))
    assert np.all(s.dist(a, c) <= s.dist(a, b) + s.dist(b, c) + 1e-12)


def test_quasi_norm_is_not_a_metric():
    # kept as a cheap comparison gauge only: the triangle inequality fails
    q = make_metric("quasi-norm", H)
    a, b = np.zeros(3), np.array([1.0, 0, 0])
    c = mul(H, b, [0.0, 1.0, 0.0])  # (1, 1, -2)
    assert np.isclose(q.dist(a, c), 2 + np.sqrt(2))
    assert q.dist(a, c) > q.dist(a, b) + q.dist(b, c)


def test_cc_horizontal_segment():
    r = cc_estimate(H, np.zeros(3), [2.0, 0.0, 0.0], CCSettings(iters=200))
    assert 2.0 - 1e-9 <= r.value <= 2.02
    assert r.defect < 1e-8


def test_cc_trivial():
    assert cc_estimate(H, [1, 2, 3], [1, 2, 3]).value == 0.0


def test_cc_curve_ends_at_target():
    cfg = CCSettings(segments=32, iters=200)
    r = cc_estimate(H, [0.1, 0.2, 0.0], [0.5, -0.1, 0.3], cfg)
    curve = r.curve(H, [0.1, 0.2, 0.0])
    assert np.allclose(curve[-1], [0.5, -0.1, 0.3], atol=1e-6)


def test_sample_ball_inside(rng):
    k = make_metric("koranyi", H)
    c = np.array([0.3, -0.2, 0.1])
    pts = k.sample_ball(c, 0.05, 2000, rng)
    assert np.all(k.dist(c, pts) <= 0.05 * (1 + 1e-12))
