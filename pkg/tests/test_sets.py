import numpy as np
import pytest

from porous_carnot.errors import InvalidArgument
from porous_carnot.group import heisenberg_spec, mul
from porous_carnot.metrics import make_metric
from porous_carnot.sets import (IN, OUT, SQRT15, cantor_oracle, cone_lambda, cusp_upsilon, empty_set, get_set,
                                pc_set, pe_set, product_oracle, shell_set, witness_ps_case1,
                                witness_ps_case2, witness_qs)

H = heisenberg_spec()
K = make_metric("koranyi", H)
EU = make_metric("euclidean", H)


def test_cone_and_cusp_examples():
    lam, ups = cone_lambda(), cusp_upsilon()
    assert lam.contains([1, 0, 0.5]) == IN
    assert lam.contains([0, 0, 1]) == OUT
    assert lam.contains([1, 0, 1]) == IN
    assert ups.contains([0.1, 0, 0.05]) == IN
    assert ups.contains([1, 0, 1]) == OUT
    assert np.all(ups.contains(np.c_[np.zeros(5), np.zeros(5), np.linspace(-2, 2, 5)]) == IN)


def test_ladder_set_examples():
    pe = pe_set()
    assert pe.contains([0.5, 0, 0.1]) == IN
    assert pe.contains([0, 0, 0]) == IN
    assert pe.contains([0.6, 0, 0]) == OUT
    assert pc_set().contains([0.5, 0, 0.6]) == IN  # 0.6 >= 2 * 0.25
    assert pc_set().contains([0.5, 0, 0.1]) == OUT


def test_witness_examples():
    p = witness_ps_case1(np.array([0.01, 0, 0.02]), 0.005)
    assert np.allclose(p, [0.015, 0, 0.02 - SQRT15 * 2.5e-5])
    assert np.isclose(K.dist(p, [0.01, 0, 0.02]), 0.01)
    p = witness_ps_case2(np.array([0.5, 0, 0.1]), 0.1)
    assert np.allclose(p, [0.6, 0, 0.1])
    assert np.isclose(K.dist(p, [0.5, 0, 0.1]), 0.1)
    q = witness_qs(np.array([0.1, 0, 0.01]), 0.05)
    assert np.allclose(q, [0.05, 0, 0.06])
    assert np.isclose(EU.dist(q, [0.1, 0, 0.01]), 0.05 * np.sqrt(2))
    assert np.allclose(witness_qs(np.array([0.1, 0, 0.01]), 0.0), [0.1, 0, 0.01])
    q = witness_qs(np.array([0.1, 0, 0.0]), 0.05)
    assert q[2] >= 2 * (0.05) ** 2


def test_witness_errors():
    with pytest.raises(InvalidArgument):
        witness_ps_case1(np.array([0.0, 0, 0.1]), 0.01)
    with pytest.raises(InvalidArgument):
        witness_qs(np.array([0.1, 0, 0.1]), 0.1)


def test_ps_case2_stays_in_cone(rng):
    lam = cone_lambda()
    for _ in range(200):
        R, ang = rng.uniform(0.05, 0.9), rng.uniform(0, 2 * np.pi)
        base = np.array([R * np.cos(ang), R * np.sin(ang), rng.uniform(-R, R)])
        p = witness_ps_case2(base, rng.uniform(0, 0.1))
        assert lam.contains(p) == IN
        assert np.isclose(np.hypot(p[0], p[1]), R + np.hypot(*(p[:2] - base[:2])))


def _ladder_radii(rng, count, n_max=6, digits=30):
    """Radii within ~3^-30 of the union of the A_{n,k}."""
    n = rng.integers(1, n_max + 1, count)
    k = rng.integers(0, 2 ** n)
    c = (2 * rng.integers(0, 2, (count, digits)) * 3.0 ** -np.arange(1, digits + 1)).sum(1)
    return 2.0 ** -n + (k + c) * 4.0 ** -n


def _near_members(name, rng, count=60_000):
    if name in ("lambda", "upsilon"):
        return None
    R = _ladder_radii(rng, count)
    ang = rng.uniform(0, 2 * np.pi, count)
    u = rng.uniform(-1, 1, count)
    if name == "pe":
        t = u * R
    elif name == "pc":
        t = np.sign(u) * (2 * R * R + np.abs(u) * (2 - 2 * R * R))
    else:
        t = 2 * u
    return np.c_[R * np.cos(ang), R * np.sin(ang), t]


@pytest.mark.parametrize("name,make", [("pe", pe_set), ("pc", pc_set), ("lambda", cone_lambda),
                                       ("upsilon", cusp_upsilon), ("shell", lambda: shell_set(1, 0))])
@pytest.mark.parametrize("metric", [K, EU])
def test_dist_lower_sound(name, make, metric, rng):
    """The certified bound never exceeds the distance to a (near-)member."""
    E = make()
    lo, hi = E.box
    members = _near_members(name, rng)
    slack = 1e-9
    if members is None:
        cloud = rng.uniform(lo, hi, (200_000, 3))
        members, slack = cloud[E.contains(cloud) == IN], 1e-12
    if name == "shell":
        members = members[(np.hypot(members[:, 0], members[:, 1]) >= 0.5) &
                          (np.hypot(members[:, 0], members[:, 1]) <= 0.75)]
    assert len(members) > 1000
    probes = np.concatenate([rng.uniform(lo, hi, (200, 3)),
                             members[:100] + rng.normal(0, 1e-3, (100, 3))])
    low = E.dist_lower(probes, metric)
    for p, b in zip(probes, low):
        assert b <= metric.dist(p, members).min() + slack


def test_product_oracle_and_transfer(rng):
    F = cantor_oracle()
    prod = product_oracle(F, H)
    assert prod.contains([0.25, 7.0, -3.0]) == IN
    assert np.all(empty_set(H).contains(rng.uniform(-1, 1, (100, 3))) == OUT)
    # a Koranyi hole for C x R^2 gives the 1-D hole (c - rho, c + rho) for C
    c, rho = 0.5, 1.0 / 6.0 - 1e-9
    center = np.array([c, 0.3, -0.2])
    pts = K.sample_ball(center, rho, 20_000, rng)
    assert np.all(prod.contains(pts) == OUT)
    xs = np.linspace(c - rho, c + rho, 4001)
    assert np.all(F.contains(xs[:, None]) == OUT)


def test_registry():
    assert get_set("pe").name == "pe"
    with pytest.raises(InvalidArgument, match="known sets"):
        get_set("nope")


def test_pe_has_zero_measure(rng):
    pe = pe_set()
    lo, hi = pe.box
    pts = rng.uniform(lo, hi, (1_000_000, 3))
    assert np.count_nonzero(pe.contains(pts) == IN) == 0
