"""Scale-laddered porosity profiles.

At each scale r_j the engine looks for points x with d(x, a) <= r_j and a
ball B(x, lam * d(x, a)) missing the set, and records the best ``lam``.  With a
certified distance bound from the oracle the hole radius is that bound; without
one, candidate holes are tested by rejection sampling and the profile is
flagged as heuristic.
"""
from __future__ import annotations

import hashlib
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .errors import InvalidArgument
from .group import _as_points, dilate, mul
from .metrics import Metric, snowflake, unit_sphere
from .sets import OUT, SetOracle

LAMBDA_CAP = 1.0 - 1e-12
SAMPLING_LEVELS = (0.5, 1.0 / 3.0, 0.25, 0.1, 0.05)


@dataclass(frozen=True)
class ScaleConfig:
    r0: float = 0.5
    q: float = 0.5
    count: int = 20

    def radii(self) -> np.ndarray:
        if self.count < 1:
            raise InvalidArgument("need at least one scale")
        if not (self.r0 > 0 and 0 < self.q < 1):
            raise InvalidArgument("scale ladder needs r0 > 0 and 0 < q < 1")
        return self.r0 * self.q ** np.arange(self.count)


@dataclass(frozen=True)
class SearchConfig:
    effort: int = 6          # 2^effort directions and 2^effort radial fractions
    refine: bool = True
    samples: int = 0         # > 0 forces sampling mode with this many points per test
    seed: int = 0
    threads: int = 1


@dataclass
class Witness:
    center: np.ndarray
    radius: float
    dist: float


@dataclass
class PorosityProfile:
    base: np.ndarray
    scales: np.ndarray
    lambda_hat: np.ndarray
    witnesses: list[Witness | None]
    mode: str
    search_effort: int
    set_name: str = ""
    metric_name: str = ""
    seed: int = 0
    extra: dict = field(default_factory=dict)


# ---------------------------------------------------------------------------
# candidate generation


def _directions(metric: Metric, count: int, seed: int) -> np.ndarray:
    spec = metric.spec
    if spec.n == 1:
        return np.array([[1.0], [-1.0]])
    rng = np.random.default_rng([seed, 7919])
    return unit_sphere(metric, count, rng)


def _along(metric: Metric, a: np.ndarray, dirs: np.ndarray, dists: np.ndarray) -> np.ndarray:
    """Points at root distance ``dists`` from ``a`` in directions ``dirs`` (outer product)."""
    spec = metric.spec
    if metric.root.kind == "euclidean":
        return a + dists[None, :, None] * dirs[:, None, :]
    h = dirs[:, None, :] * dists[None, :, None] ** np.asarray(spec.weights, dtype=np.float64)
    return mul(spec, a, h)


def _ray(metric: Metric, a: np.ndarray, c: np.ndarray, f: np.ndarray) -> np.ndarray:
    """Points whose root distance to ``a`` is ``f`` times that of ``c``."""
    spec = metric.spec
    f = np.asarray(f, dtype=np.float64)
    if metric.root.kind == "euclidean":
        return a + f[:, None] * (c - a)
    h = mul(spec, -a, c)
    return mul(spec, a, h * f[:, None] ** np.asarray(spec.weights, dtype=np.float64))


def _in_box(E: SetOracle, pts: np.ndarray) -> np.ndarray:
    lo, hi = E.box
    return np.all((pts >= lo) & (pts <= hi), axis=-1)


# ---------------------------------------------------------------------------
# hole scoring


class _Scorer:
    """Scores candidate centers: hole radius and fraction lam = radius / d(x, a)."""

    def __init__(self, E, metric, a, r, samples, seed, j):
        self.E, self.metric, self.a, self.r = E, metric, a, r
        self.samples, self.seed, self.j = samples, seed, j
        self.examined = 0

    def score(self, c: np.ndarray):
        keep = _in_box(self.E, c)
        c = c[keep]
        d = self.metric.dist(self.a, c) if len(c) else np.empty(0)
        ok = (d > 0) & (d <= self.r * (1 + 1e-12))
        c, d = c[ok], d[ok]
        self.examined += len(c)
        if len(c) == 0:
            return c, d, d
        if self.samples == 0:
            rho = np.minimum(self.E.dist_lower(c, self.metric), LAMBDA_CAP * d)
        else:
            rho = np.array([self._sampled_radius(ci, di) for ci, di in zip(c, d)])
        return c, d, rho

    def _sampled_radius(self, c, d):
        # seed from the candidate itself so results do not depend on visiting order
        tag = int.from_bytes(hashlib.blake2b(c.tobytes(), digest_size=8).digest(), "little")
        rng = np.random.default_rng([self.seed, self.j, tag])
        for lam in SAMPLING_LEVELS:
            pts = self.metric.sample_ball(c, lam * d, self.samples, rng)
            if np.all(self.E.contains(pts) == OUT):
                return lam * d
        return 0.0


def _refine(scorer: _Scorer, metric: Metric, a, c, d, iters=24):
    """Golden-section search on the hole fraction along the ray through ``c``."""
    hi_f = min(1.0 + 1.0 / 32.0, scorer.r / d)
    lo, hi = 1.0 - 1.0 / 32.0, hi_f
    g = (np.sqrt(5.0) - 1.0) / 2.0
    best = (None, 0.0, 0.0)

    def val(f):
        nonlocal best
        cc, dd, rr = scorer.score(_ray(metric, a, c, np.array([f])))
        if len(cc) == 0:
            return -1.0
        lam = rr[0] / dd[0]
        if lam > best[1]:
            best = (cc[0], lam, dd[0])
        return lam

    x1, x2 = hi - g * (hi - lo), lo + g * (hi - lo)
    f1, f2 = val(x1), val(x2)
    for _ in range(iters):
        if f1 >= f2:
            hi, x2, f2 = x2, x1, f1
            x1 = hi - g * (hi - lo)
            f1 = val(x1)
        else:
            lo, x1, f1 = x1, x2, f2
            x2 = lo + g * (hi - lo)
            f2 = val(x2)
    return best


def _scale_search(E, metric, a, r, j, search: SearchConfig, dirs_all):
    scorer = _Scorer(E, metric, a, r, search.samples, search.seed, j)
    root_r = r ** (1.0 / metric.exponent)
    best = (None, 0.0, 0.0)

    def take(c, d, rho):
        nonlocal best
        if len(c):
            lam = rho / d
            i = int(np.argmax(lam))
            if lam[i] > best[1]:
                best = (c[i], float(lam[i]), float(d[i]))

    take(*scorer.score(E.witnesses(a, r, metric)))
    # nested levels: each level's candidates contain the previous ones
    for lev in range(1, search.effort + 1):
        k = 2 ** lev
        dirs = dirs_all[:k]
        fr = np.arange(1, k + 1) / k
        pts = _along(metric, a, dirs, fr * root_r).reshape(-1, metric.spec.n)
        take(*scorer.score(pts))
        if search.refine and best[0] is not None:
            c, lam, d = _refine(scorer, metric, a, best[0], best[2])
            if lam > best[1]:
                best = (c, lam, d)
    if best[0] is None or best[1] <= 0:
        return 0.0, None, scorer.examined
    c, lam, d = best
    return lam, Witness(np.array(c), lam * d, d), scorer.examined


def porosity_profile(E: SetOracle, metric: Metric, a, scales: ScaleConfig | None = None,
                     search: SearchConfig | None = None) -> PorosityProfile:
    """Best certified (or sampled) hole fraction at each scale of the ladder."""
    scales = scales or ScaleConfig()
    search = search or SearchConfig()
    radii = scales.radii()
    a = _as_points(metric.spec, a).astype(np.float64)
    if a.shape != (metric.spec.n,):
        raise InvalidArgument("base point must be a single point")
    if not _in_box(E, a):
        raise InvalidArgument(f"base point {a} lies outside the box of {E.name!r}")
    if search.effort < 1:
        raise InvalidArgument("search effort must be >= 1")
    if search.samples == 0 and E.dist_lower(a, metric) is None:
        raise InvalidArgument(f"set {E.name!r} has no distance bound for {metric.name}; "
                              "set a sampling density")
    mode = "certified" if search.samples == 0 else "sampling"
    dirs_all = _directions(metric, 2 ** search.effort, search.seed)

    def job(j):
        return _scale_search(E, metric, a, float(radii[j]), j, search, dirs_all)

    if search.threads > 1:
        with ThreadPoolExecutor(search.threads) as ex:
            results = list(ex.map(job, range(len(radii))))
    else:
        results = [job(j) for j in range(len(radii))]
    return PorosityProfile(
        base=a, scales=radii,
        lambda_hat=np.array([r[0] for r in results]),
        witnesses=[r[1] for r in results],
        mode=mode,
        search_effort=int(sum(r[2] for r in results)),
        set_name=E.name, metric_name=metric.name, seed=search.seed,
    )


def classify(profile: PorosityProfile, lam_min: float, r_cut: float) -> tuple[str, float | None]:
    """('porous-evidence', inf lam) | ('nonporous-evidence', None) | ('inconclusive', None)."""
    lam = np.asarray(profile.lambda_hat)
    if lam.size == 0:
        raise InvalidArgument("empty profile")
    if lam.size == 1:
        return "inconclusive", None
    small = lam[profile.scales <= r_cut]
    if small.size and small.min() >= lam_min:
        return "porous-evidence", float(small.min())
    tail = lam[-5:]
    if lam.size >= 5 and np.all(tail < lam_min) and np.all(np.diff(tail) <= 0):
        return "nonporous-evidence", None
    return "inconclusive", None


def recheck_witnesses(profile: PorosityProfile, E: SetOracle, metric: Metric,
                      samples: int = 2000, seed: int = 1) -> int:
    """Resample every recorded hole; returns the number of points found in E."""
    rng = np.random.default_rng(seed)
    hits = 0
    for w in profile.witnesses:
        if w is None:
            continue
        pts = metric.sample_ball(w.center, w.radius, samples, rng)
        hits += int(np.count_nonzero(E.contains(pts) != OUT))
    return hits


@dataclass
class TransferReport:
    eps: float
    lambda_d: np.ndarray
    lambda_snow: np.ndarray
    rel_err: np.ndarray
    centers_match: bool
    passed: bool


def snowflake_transfer_check(E: SetOracle, metric: Metric, a, eps: float,
                             scales: ScaleConfig | None = None, search: SearchConfig | None = None,
                             tol: float = 0.15) -> TransferReport:
    """Compare profiles in d and d^eps at matching scales r and r^eps."""
    scales = scales or ScaleConfig()
    p1 = porosity_profile(E, metric, a, scales, search)
    sm = snowflake(metric, eps)
    s2 = ScaleConfig(scales.r0 ** eps, scales.q ** eps, scales.count)
    p2 = porosity_profile(E, sm, a, s2, search)
    want = p1.lambda_hat ** eps
    got = p2.lambda_hat
    rel = np.where(want > 0, np.abs(got - want) / np.where(want > 0, want, 1.0), np.abs(got))
    match = True
    for w1, w2 in zip(p1.witnesses, p2.witnesses):
        if (w1 is None) != (w2 is None):
            match = False
        elif w1 is not None:
            match &= bool(np.allclose(w1.center, w2.center, atol=1e-9 * max(1.0, w1.dist)))
    return TransferReport(eps, p1.lambda_hat, got, rel, match, bool(np.all(rel <= tol)))
