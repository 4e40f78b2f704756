"""The ten acceptance criteria, one test each, at their stated tolerances.

Every test records a one-line PASS/FAIL summary (shown in the terminal
summary) before asserting, so a failing criterion still reports its numbers.
"""
import time
from fractions import Fraction

import numpy as np
import pytest

from conftest import ACCEPTANCE_LINES
from porous_carnot.cantor import LadderIndex, Membership, ank_member, gap_window_point
from porous_carnot.gradient import horizontal_gradient, preimage_scan, usefullemma_experiment
from porous_carnot.group import dilate, heisenberg_spec, inv, mul, puc_tau, spec_from_json, validate
from porous_carnot.metrics import CCSettings, cc_estimate, koranyi_lower_bound, make_metric, snowflake
from porous_carnot.nondiff import bump_make, quotient_scan, sampled_lipschitz
from porous_carnot.porosity import ScaleConfig, SearchConfig, porosity_profile, recheck_witnesses
from porous_carnot.scenarios import (SLAB_G, cantor_cover, cantor_pieces, cover_deltas, near_set_samples,
                                     piece_points, point_cover, polynomial_family, quadratic_instance,
                                     shell_cover, slab_function)
from porous_carnot.sets import IN, pc_set, pe_set, witness_ps_case1, witness_ps_case2, witness_qs
from porous_carnot.whitney import cover_verify

H = heisenberg_spec()
K = make_metric("koranyi", H)
EU = make_metric("euclidean", H)


def record(n, ok, detail, elapsed, limit):
    ok = bool(ok) and elapsed < limit
    ACCEPTANCE_LINES[n] = f"criterion {n:2d}: {'PASS' if ok else 'FAIL'}  {detail}  [{elapsed:.1f}s / {limit:g}s]"
    print(ACCEPTANCE_LINES[n])
    return ok


# a step-2 group given as data: generators x1, x2, x3 and two vertical
# coordinates fed by [x1, x2] and [x1, x3]
STEP2_JSON = {
    "name": "two-bracket", "n": 5, "m": 3, "weights": [1, 1, 1, 2, 2],
    "law": [
        {"i": 4, "monomials": [{"coef": 0.5, "p": [1], "q": [2]}, {"coef": -0.5, "p": [2], "q": [1]}]},
        {"i": 5, "monomials": [{"coef": 1.5, "p": [1], "q": [3]}, {"coef": -1.5, "p": [3], "q": [1]}]},
    ],
}


def test_criterion_1_group_algebra():
    t0 = time.perf_counter()
    rng = np.random.default_rng(1)
    a, b, c = rng.uniform(-1, 1, (3, 10_000, 3))
    lam = rng.uniform(0.1, 3, (10_000, 1))
    errs = {
        "assoc": np.abs(mul(H, mul(H, a, b), c) - mul(H, a, mul(H, b, c))).max(),
        "identity": np.abs(mul(H, a, np.zeros(3)) - a).max() + np.abs(mul(H, np.zeros(3), a) - a).max(),
        "inverse": np.abs(mul(H, inv(H, a), a)).max() + np.abs(mul(H, a, inv(H, a))).max(),
        "dilation": np.abs(dilate(H, lam, mul(H, a, b)) - mul(H, dilate(H, lam, a), dilate(H, lam, b))).max(),
    }
    dt = time.perf_counter() - t0
    worst = max(errs.values())
    assert record(1, worst <= 1e-10, f"max error {worst:.1e} over 10^4 triples", dt, 1.0)


def test_criterion_2_puc():
    t0 = time.perf_counter()
    user = spec_from_json(STEP2_JSON)
    validate(user)
    worst = 0.0
    for spec in (H, user):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            target = rng.uniform(-2, 2, spec.n)
            t = rng.uniform(-2, 2)
            point = np.concatenate([[t], puc_tau(spec, t, target)])
            red = mul(spec, inv(spec, point), target)
            worst = max(worst, float(np.abs(red[1:]).max()), abs(red[0] - (target[0] - t)))
    dt = time.perf_counter() - t0
    assert record(2, worst <= 1e-12, f"max tail {worst:.1e} (H^1 and a JSON step-2 group)", dt, 1.0)


def test_criterion_3_metrics():
    t0 = time.perf_counter()
    rng = np.random.default_rng(3)
    a, b, c = rng.uniform(-1, 1, (3, 20_000, 3))
    worst_axiom = 0.0
    for m in (EU, K, snowflake(K, 0.5)):
        dab, dba = m.dist(a, b), m.dist(b, a)
        worst_axiom = max(worst_axiom, np.abs(dab - dba).max(), np.abs(m.dist(a, a)).max(),
                          np.maximum(m.dist(a, c) - dab - m.dist(b, c), 0).max())
        assert np.all(dab[np.any(a != b, axis=1)] > 0)
    r = rng.uniform(0.01, 10, 20_000)
    d = K.dist(a, b)
    homog = np.abs(K.dist(dilate(H, r[:, None], a), dilate(H, r[:, None], b)) - r * d) / np.maximum(r * d, 1)
    z = rng.uniform(-1, 1, (20_000, 3))
    inv_err = np.abs(K.dist(mul(H, z, a), mul(H, z, b)) - d)
    p = rng.uniform(-3, 3, (100_000, 3))
    lower_bad = int(np.count_nonzero(koranyi_lower_bound(p) > K.norm(p)))
    dt = time.perf_counter() - t0
    ok = worst_axiom <= 1e-9 and homog.max() <= 1e-10 and inv_err.max() <= 1e-10 and lower_bad == 0
    assert record(3, ok, f"axioms {worst_axiom:.1e}, homogeneity {homog.max():.1e}, invariance "
                         f"{inv_err.max():.1e}, lower-bound violations {lower_bad}", dt, 5.0)


def _dido_oracle(area, sides=1 << 16):
    """Perimeter of a fine regular polygon enclosing ``area``."""
    # area of a regular N-gon with circumradius rho: N/2 rho^2 sin(2 pi / N)
    rho = np.sqrt(2 * area / (sides * np.sin(2 * np.pi / sides)))
    return sides * 2 * rho * np.sin(np.pi / sides)


def test_criterion_4_cc_estimator():
    t0 = time.perf_counter()
    horiz = cc_estimate(H, np.zeros(3), [2.0, 0.0, 0.0]).value
    vert = cc_estimate(H, np.zeros(3), [0.0, 0.0, 1.0]).value
    # a horizontal loop reaches height |t| = 4 * enclosed area
    oracle = _dido_oracle(0.25)
    dt = time.perf_counter() - t0
    # 1e-12 of slack below 2: the length is a float sum of 64 segment lengths
    ok = 2.0 - 1e-12 <= horiz <= 2.04 and abs(vert - oracle) <= 0.05 * oracle
    assert abs(oracle - np.sqrt(np.pi)) < 1e-8
    assert record(4, ok, f"d(0,(2,0,0)) = {horiz:.5f}, d(0,(0,0,1)) = {vert:.5f} vs oracle {oracle:.5f}",
                  dt, 60.0)


def test_criterion_5_gap_window():
    t0 = time.perf_counter()
    rng = np.random.default_rng(5)
    fails = 0
    for t in rng.uniform(0.001, 0.999, 10_000):
        idx, x = gap_window_point(t)
        if not (t <= x <= t + 4 * t * t and idx.lo <= x <= idx.hi):
            fails += 1
    tiling = True
    for n in range(1, 11):
        ends = [(LadderIndex(n, k).lo, LadderIndex(n, k).hi) for k in range(2 ** n)]
        tiling &= ends[0][0] == Fraction(1, 2 ** n) and ends[-1][1] == Fraction(2, 2 ** n)
        tiling &= all(p[1] == q[0] for p, q in zip(ends, ends[1:]))
    dt = time.perf_counter() - t0
    assert record(5, fails == 0 and tiling, f"{fails} window failures in 10^4, tiling exact: {tiling}", dt, 5.0)


def test_criterion_6_witness_identities():
    t0 = time.perf_counter()
    rng = np.random.default_rng(6)
    worst = 0.0
    for _ in range(10_000):
        R, ang = rng.uniform(0.01, 1.0), rng.uniform(0, 2 * np.pi)
        base = np.array([R * np.cos(ang), R * np.sin(ang), rng.uniform(-1, 1)])
        # s >= 1e-3 keeps the vertical term sqrt(15) s^2 resolvable to 1e-10
        # next to |t| <= 1 in double precision
        s = rng.uniform(1e-3, 0.1)
        worst = max(worst, abs(K.dist(witness_ps_case1(base, s), base) / s - 2.0),
                    abs(K.dist(witness_ps_case2(base, s), base) / s - 1.0))
        sq = rng.uniform(0, 0.99) * R
        if sq > 0:
            worst = max(worst, abs(EU.dist(witness_qs(base, sq), base) / sq - np.sqrt(2)))
    dt = time.perf_counter() - t0
    assert record(6, worst <= 1e-10, f"max ratio error {worst:.1e} over 10^4 inputs", dt, 2.0)


def _set_points(E, rng, count, cusp):
    """Exact members: radii with finite Cantor parts that are exact floats."""
    pts = []
    cparts = [0.0, 0.25, 0.75, 1.0]
    while len(pts) < count:
        n = int(rng.integers(1, 7))
        k = int(rng.integers(0, 2 ** n))
        R = 2.0 ** -n + (k + cparts[int(rng.integers(0, 4))]) * 4.0 ** -n
        if cusp:
            lo = 2 * R * R
            t = rng.choice([-1, 1]) * rng.uniform(lo, 2.0)
        else:
            t = rng.uniform(-R, R)
        axis = int(rng.integers(0, 4))
        xy = [(R, 0.0), (-R, 0.0), (0.0, R), (0.0, -R)][axis]
        p = np.array([xy[0], xy[1], t])
        if E.contains(p) == IN:
            pts.append(p)
    return np.array(pts)


def test_criterion_7_porosity_contrast():
    t0 = time.perf_counter()
    rng = np.random.default_rng(7)
    scales = ScaleConfig(1e-3, 0.5, 6)
    search = SearchConfig(effort=5)
    out = {}
    hits = 0
    for name, E, good, bad in (("pe", pe_set(), EU, K), ("pc", pc_set(), K, EU)):
        lows = []
        for p in _set_points(E, rng, 50, cusp=(name == "pc")):
            prof = porosity_profile(E, good, p, scales, search)
            lows.append(prof.lambda_hat.min())
            hits += recheck_witnesses(prof, E, good, samples=1000, seed=int(rng.integers(1 << 30)))
        at0 = porosity_profile(E, bad, np.zeros(3), ScaleConfig(), SearchConfig())
        tail = at0.lambda_hat[at0.scales <= 1e-3]
        out[name] = (min(lows), tail.max())
    dt = time.perf_counter() - t0
    ok = (out["pe"][0] >= 0.25 and out["pe"][1] <= 0.05 and out["pc"][0] >= 0.25 and out["pc"][1] <= 0.05
          and hits == 0)
    detail = (f"P_e: euclid min {out['pe'][0]:.3f}, koranyi@0 max {out['pe'][1]:.3f}; "
              f"P_c: koranyi min {out['pc'][0]:.3f}, euclid@0 max {out['pc'][1]:.3f}; resample hits {hits}")
    assert record(7, ok, detail, dt, 600.0)


def test_criterion_8_whitney_cover():
    t0 = time.perf_counter()
    results = {}
    E, cover = point_cover()
    grid = np.arange(-1.0, 1.0 + 5e-5, 1e-4)[:, None]
    results["{0}"] = cover_verify(cover, E, cover_deltas(cover), samples=grid, n_random=0)
    E, cover = cantor_cover()
    grid = np.arange(0.0, 1.0 + 5e-5, 1e-4)[:, None]
    results["Cantor"] = cover_verify(cover, E, cover_deltas(cover), samples=grid, n_random=0)
    E, cover = shell_cover()
    near = near_set_samples(E, cover, 5000, 1e-4)
    results["shell"] = cover_verify(cover, E, cover_deltas(cover), samples=near, n_random=50_000)
    dt = time.perf_counter() - t0
    ok = all(r.passed for r in results.values())
    detail = ", ".join(f"{k}: {'ok' if r.passed else 'failed'}" for k, r in results.items())
    assert record(8, ok, detail, dt, 300.0)


@pytest.fixture(scope="module")
def pieces():
    return cantor_pieces(8, 6.0)


def _piece_minima(sc):
    m = sc.pieces[0][1].metric
    scales = 1e-3 * 2.0 ** -np.arange(14)
    mins = []
    for i, a in enumerate(sc.offsets, 1):
        qs = [quotient_scan(sc.f, [x], m, scales).max_quotient.max()
              for x in piece_points(a, sc.width, 20, seed=i)]
        mins.append(min(qs))
    return np.array(mins)


def test_criterion_9_nonsubdiff(pieces):
    """Literal threshold 0.5 beta / C_i on f itself; see the decisions ledger."""
    t0 = time.perf_counter()
    sc = pieces
    m = sc.pieces[0][1].metric
    lip = sampled_lipschitz(sc.f, sc.f.spec, 100_000, 9, metric=m, lo=-0.05, hi=1.0)
    mins = _piece_minima(sc)
    thr = 0.5 * sc.bump.beta / sc.C
    dt = time.perf_counter() - t0
    below = [i + 1 for i, v in enumerate(mins) if v < thr]
    detail = (f"threshold {thr:.4f}; per-piece minima {np.array2string(mins, precision=4)}; "
              f"pieces below: {below}; Lipschitz {lip:.6f}")
    assert record(9, not below and lip <= 1 + 1e-6, detail, dt, 600.0)


def test_nonsubdiff_weighted_threshold(pieces):
    """Companion check: f carries f_i with weight 2^-i, so the gap it can show
    at points of E_i is 0.5 beta / (2^i C_i); each f_i alone reaches 0.5 beta / C_i."""
    sc = pieces
    m = sc.pieces[0][1].metric
    mins = _piece_minima(sc)
    thr = 0.5 * sc.bump.beta / sc.C
    assert np.all(mins >= thr * 2.0 ** -np.arange(1, len(mins) + 1))
    scales = 1e-3 * 2.0 ** -np.arange(14)
    for i, (a, fi) in enumerate(zip(sc.offsets, sc.f.meta["fields"]), 1):
        for x in piece_points(a, sc.width, 5, seed=i):
            assert quotient_scan(fi, [x], m, scales).max_quotient.max() >= thr


def test_criterion_10_gradient_lab():
    t0 = time.perf_counter()
    rng = np.random.default_rng(10)
    P = rng.uniform(-1, 1, (1000, 3))
    fd = max(float(np.abs(horizontal_gradient(f, P) - g(P)).max()) for _, f, g in polynomial_family(H))
    bump = bump_make(H)
    hits = 0
    for k in range(50):
        ins = quadratic_instance(bump, rng)
        rep = usefullemma_experiment(ins.F, ins.E, ins.z, ins.r, ins.rho, ins.theta, bump, ins.h, seed=k)
        hits += rep.in_E
    pre = preimage_scan(slab_function(H), SLAB_G[0], SLAB_G[1], (-np.ones(3), np.ones(3)), K)
    slab_ok = not pre.empty and all(v == "nonporous-evidence" for v in pre.verdicts)
    dt = time.perf_counter() - t0
    ok = fd <= 1e-6 and hits == 50 and slab_ok
    assert record(10, ok, f"FD error {fd:.1e}; in_E {hits}/50; slab verdicts {sorted(set(pre.verdicts))} "
                          f"at {len(pre.verdicts)} points", dt, 600.0)
