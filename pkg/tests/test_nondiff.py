import numpy as np
import pytest

from porous_carnot.errors import InvalidArgument
from porous_carnot.group import GroupLinearMap, heisenberg_spec
from porous_carnot.metrics import koranyi_norm, make_metric
from porous_carnot.nondiff import (ScalarField, bump_make, piece_function, quotient_scan, sampled_lipschitz,
                                   symmetric_quotient)
from porous_carnot.scenarios import point_cover
from porous_carnot.whitney import WhitneyCover

H = heisenberg_spec()
K = make_metric("koranyi", H)


@pytest.fixture(scope="module")
def bump():
    return bump_make(H)


def test_bump_shape(bump, rng):
    assert bump(np.zeros(3)) == pytest.approx(bump.beta) and bump.beta > 0
    far = rng.uniform(-2, 2, (20000, 3))
    far = far[K.norm(far) >= 1]
    assert np.all(bump(far) == 0)


def test_bump_lipschitz(bump):
    assert sampled_lipschitz(bump, H, 100_000, 3, metric=K) <= 1.0


@pytest.fixture(scope="module")
def piece():
    E, cover = point_cover()
    b = bump_make(cover.metric.spec, metric=cover.metric)
    return E, cover, b, piece_function(cover, b)


def test_piece_values(piece):
    E, cover, b, f = piece
    assert np.allclose(f(cover.centers), cover.radii * b.beta)
    assert f([0.0]) == 0.0
    assert sampled_lipschitz(f, f.spec, 50_000, 0, metric=cover.metric) <= 1 + 1e-6


def test_piece_rejects_overlaps(piece):
    E, cover, b, f = piece
    c = np.vstack([cover.centers, cover.centers[:1]])
    r = np.concatenate([cover.radii, cover.radii[:1]])
    with pytest.raises(InvalidArgument):
        piece_function(WhitneyCover(c, r, cover.C, cover.domain, cover.metric), b)


def test_symmetric_quotient_examples():
    f = ScalarField(koranyi_norm, H)
    for s in (0.1, 1e-3):
        assert symmetric_quotient(f, np.zeros(3), np.array([[s, 0, 0]]), K)[0] == pytest.approx(2.0)
    lin = ScalarField(lambda p: GroupLinearMap((0.3, -1.2))(H, p), H)
    h = np.random.default_rng(0).uniform(-1, 1, (100, 3))
    assert np.allclose(symmetric_quotient(lin, [0.2, 0.1, 0.3], h, K), 0, atol=1e-12)
    const = ScalarField(lambda p: np.full(len(p), 3.0), H)
    assert np.all(symmetric_quotient(const, np.zeros(3), h, K) == 0)
    with pytest.raises(InvalidArgument):
        symmetric_quotient(const, np.zeros(3), np.zeros((1, 3)), K)


def test_quotient_scan_linear_and_center(piece):
    lin = ScalarField(lambda p: GroupLinearMap((0.3, -1.2))(H, p), H)
    scan = quotient_scan(lin, [0.1, 0.2, 0.0], K, 1e-2 * 2.0 ** -np.arange(6))
    assert np.allclose(scan.max_quotient, 0, atol=1e-12)
    E, cover, b, f = piece
    k = int(np.argmax(cover.radii))
    q = quotient_scan(f, cover.centers[k], cover.metric, cover.radii[k] * 1e-2 * 2.0 ** -np.arange(6))
    assert np.all(np.abs(q.max_quotient) <= 1.0)
