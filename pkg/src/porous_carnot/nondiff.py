"""Bump functions, Whitney-cover pieces and symmetric difference quotients.

A piece function places a rescaled bump r * b(delta_{1/r}(y^-1 x)) on every
ball B(y, r) of a cover.  Summing pieces with weights 2^-i gives a Lipschitz
function whose symmetric quotients stay large at points of the covered sets,
while vanishing in the limit inside the balls where the bumps are smooth.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from . import kernels
from .errors import InvalidArgument
from .group import GroupSpec, _as_points, dilate, is_heisenberg, mul
from .metrics import Metric, make_metric, unit_sphere
from .whitney import WhitneyCover, _code


def smoothstep5(v):
    v = np.clip(v, 0.0, 1.0)
    return v * v * v * (10.0 - 15.0 * v + 6.0 * v * v)


SMOOTHSTEP_SLOPE = 15.0 / 8.0  # max of the derivative of smoothstep5


@dataclass(frozen=True)
class BumpSpec:
    """b(x) = alpha * psi(N(x)) with psi = 1 on [0, flat] and 0 on [1, inf)."""

    spec: GroupSpec
    metric: Metric
    flat: float
    alpha: float

    @property
    def beta(self) -> float:
        return self.alpha

    @property
    def lipschitz(self) -> float:
        return self.alpha * SMOOTHSTEP_SLOPE / (1.0 - self.flat)

    def profile(self, u):
        return 1.0 - smoothstep5((np.asarray(u) - self.flat) / (1.0 - self.flat))

    def __call__(self, h) -> np.ndarray:
        return self.alpha * self.profile(self.metric.norm(h))


def bump_make(spec: GroupSpec, flat: float = 0.5, metric: Metric | None = None,
              pairs: int = 20_000, seed: int = 0) -> BumpSpec:
    """Flat-top bump with Lipschitz constant <= 1 for ``metric``.

    For a true metric the norm is 1-Lipschitz, so alpha = (1 - flat) / slope is
    exact.  The value is then checked on sampled pairs and shrunk if needed.
    """
    if not 0 <= flat < 1:
        raise InvalidArgument("flat part must lie in [0, 1)")
    if metric is None:
        if is_heisenberg(spec):
            metric = make_metric("koranyi", spec)
        elif spec.step == 1:
            metric = make_metric("euclidean", spec)
        else:
            metric = make_metric("quasi-norm", spec)
    alpha = (1.0 - flat) / SMOOTHSTEP_SLOPE
    b = BumpSpec(spec, metric, flat, alpha)
    ratio = sampled_lipschitz(b, spec, pairs, seed, box=1.2)
    if ratio > 1.0:
        alpha /= ratio * (1.0 + 1e-9)
    if not alpha > 1e-8:
        raise InvalidArgument("bump calibration collapsed; invalid shape")
    return BumpSpec(spec, metric, flat, alpha)


@dataclass
class ScalarField:
    fn: Callable[[np.ndarray], np.ndarray]
    spec: GroupSpec
    lipschitz: float = np.inf
    meta: dict = field(default_factory=dict)

    def __call__(self, x) -> np.ndarray:
        x = _as_points(self.spec, x)
        flat = x.reshape(-1, self.spec.n)
        return np.asarray(self.fn(flat), dtype=np.float64).reshape(x.shape[:-1])


def sampled_lipschitz(f, spec: GroupSpec, pairs: int, seed: int, box=1.0, metric: Metric | None = None,
                      near: float = 0.5, lo=None, hi=None) -> float:
    """Largest |f(p) - f(q)| / d(p, q) over random pairs, half of them close."""
    metric = metric or getattr(f, "metric", None) or make_metric("euclidean", spec)
    rng = np.random.default_rng(seed)
    lo = -box * np.ones(spec.n) if lo is None else np.asarray(lo, dtype=np.float64)
    hi = box * np.ones(spec.n) if hi is None else np.asarray(hi, dtype=np.float64)
    p = rng.uniform(lo, hi, (pairs, spec.n))
    q = rng.uniform(lo, hi, (pairs, spec.n))
    k = int(pairs * near)
    # close pairs: q = p * small increment at a spread of scales
    step = 10.0 ** rng.uniform(-6, -1, (k, 1)) * rng.standard_normal((k, spec.n))
    q[:k] = mul(spec, p[:k], step * 0.3 ** (np.asarray(spec.weights) - 1))
    d = metric.dist(p, q)
    ok = d > 0
    return float((np.abs(f(p) - f(q))[ok] / d[ok]).max())


def piece_function(cover: WhitneyCover, bump: BumpSpec) -> ScalarField:
    """f(x) = r b(delta_{1/r}(y^-1 x)) on B(y, r) for (y, r) in the cover, 0 elsewhere."""
    spec = bump.spec
    if cover.metric.spec.n != spec.n:
        raise InvalidArgument("cover and bump live on different groups")
    if len(cover) and np.any(cover.radii >= 1.0):
        raise InvalidArgument("invalid cover: radii must be < 1")
    code = _code(cover.metric)
    _, n_over = kernels.overlaps(code, cover.centers, cover.radii)
    if n_over:
        raise InvalidArgument(f"invalid cover: {n_over} overlapping ball pairs")
    index = kernels.BallIndex(code, cover.centers, cover.radii)
    w = np.asarray(spec.weights, dtype=np.float64)

    def fn(x):
        out = np.zeros(x.shape[0])
        gap, j = index.query(x)
        inside = gap < 0.0
        if inside.any():
            y = cover.centers[j[inside]]
            r = cover.radii[j[inside]]
            h = mul(spec, -y, x[inside]) * (1.0 / r[:, None]) ** w
            out[inside] = r * bump(h)
        return out

    return ScalarField(fn, spec, 1.0, {"cover": cover, "bump": bump})


def build_nonsubdiff(pieces, bump: BumpSpec) -> ScalarField:
    """f = sum_i 2^-i f_i for pieces (E_i, cover_i, C_i), i = 1, 2, ..."""
    pieces = list(pieces)
    if not pieces:
        raise InvalidArgument("need at least one piece")
    fs = [piece_function(cover, bump) for _, cover, _ in pieces]

    def fn(x):
        total = np.zeros(x.shape[0])
        for i, fi in enumerate(fs, start=1):
            total += fi.fn(x) / 2.0 ** i
        return total

    meta = {"pieces": pieces, "fields": fs, "bump": bump}
    return ScalarField(fn, bump.spec, 1.0, meta)


# ---------------------------------------------------------------------------
# symmetric quotients


def symmetric_quotient(f: ScalarField, x, h, metric: Metric) -> np.ndarray:
    """(f(xh) + f(xh^-1) - 2 f(x)) / d(h, 0), vectorised over h."""
    spec = f.spec
    x = _as_points(spec, x)
    h = _as_points(spec, h)
    d = metric.norm(h)
    if np.any(d == 0):
        raise InvalidArgument("increment must differ from the identity")
    return (f(mul(spec, x, h)) + f(mul(spec, x, -h)) - 2.0 * f(x)) / d


@dataclass
class QuotientScan:
    scales: np.ndarray
    max_quotient: np.ndarray
    witness_h: list


def _cover_increments(f: ScalarField, x, radius: float, metric: Metric) -> np.ndarray:
    """h = x^-1 z for cover centers z within ``radius`` of x."""
    spec = f.spec
    covers = [c for _, c, _ in f.meta.get("pieces", ())]
    if "cover" in f.meta:
        covers.append(f.meta["cover"])
    out = []
    for cv in covers:
        if len(cv) == 0:
            continue
        d = metric.dist(x, cv.centers)
        near = cv.centers[(d <= radius) & (d > 0)]
        if len(near):
            out.append(mul(spec, -x, near))
    return np.concatenate(out) if out else np.empty((0, spec.n))


def quotient_scan(f: ScalarField, x, metric: Metric, scales, directions: int = 200,
                  seed: int = 0, analytic: bool = True) -> QuotientScan:
    """Per-scale maximum symmetric quotient at x.

    Sampled increments lie on the metric sphere of each scale; increments
    toward nearby cover centers are binned into the scale band (s_{j+1}, s_j].
    """
    spec = f.spec
    x = _as_points(spec, x).astype(np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if np.any(np.diff(scales) >= 0):
        raise InvalidArgument("scales must be strictly descending")
    rng = np.random.default_rng(seed)
    dirs = np.array([[1.0], [-1.0]]) if spec.n == 1 else unit_sphere(metric, directions, rng)
    extra = _cover_increments(f, x, float(scales[0]), metric) if analytic else np.empty((0, spec.n))
    dx = metric.norm(extra) if len(extra) else np.empty(0)
    best = np.full(len(scales), -np.inf)
    wit = [None] * len(scales)
    for j, s in enumerate(scales):
        if metric.root.kind == "euclidean":
            hs = dirs * s
        else:
            hs = dilate(spec, s, dirs)
        low = scales[j + 1] if j + 1 < len(scales) else 0.0
        band = extra[(dx > low) & (dx <= s)]
        if len(band):
            hs = np.concatenate([hs, band])
        q = symmetric_quotient(f, x, hs, metric)
        k = int(np.argmax(q))
        best[j] = q[k]
        wit[j] = hs[k]
    return QuotientScan(scales, best, wit)
