"""Horizontal derivatives, Pansu residuals, Dini derivatives and two experiments.

Derivatives are central differences along the flow x exp(s X_i) with one
Richardson step; the disagreement between the two step sizes is reported as a
noise estimate.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .errors import ExperimentInvalid, InvalidArgument
from .group import GroupLinearMap, GroupSpec, _as_points, dilate, exp_horizontal, mul
from .metrics import Metric, make_metric, unit_sphere
from .nondiff import BumpSpec, ScalarField
from .porosity import PorosityProfile, ScaleConfig, SearchConfig, classify, porosity_profile
from .sets import IN, OUT, SetOracle


def _central(f, x, i, h):
    return (f(exp_horizontal(f.spec, x, i, h)) - f(exp_horizontal(f.spec, x, i, -h))) / (2.0 * h)


def directional_derivative(f: ScalarField, x, i: int, step: float = 1e-4):
    """X_i f(x) and a noise estimate; ``x`` may hold several points."""
    if not 1 <= i <= f.spec.m:
        raise InvalidArgument(f"horizontal index must lie in 1..{f.spec.m}")
    if not step > 0:
        raise InvalidArgument("step must be positive")
    x = _as_points(f.spec, x)
    d1 = _central(f, x, i, step)
    d2 = _central(f, x, i, step / 2.0)
    rich = (4.0 * d2 - d1) / 3.0
    return rich, np.abs(rich - d2)


def horizontal_gradient(f: ScalarField, x, step: float = 1e-4) -> np.ndarray:
    """(X_1 f, ..., X_m f) stacked on the last axis."""
    return np.stack([directional_derivative(f, x, i, step)[0] for i in range(1, f.spec.m + 1)], -1)


# ---------------------------------------------------------------------------
# Pansu residuals


@dataclass
class DiffReport:
    point: np.ndarray
    L: GroupLinearMap
    scales: np.ndarray
    residuals: np.ndarray
    slope: float
    verdict: str


def _sphere_increments(metric: Metric, s: float, dirs: np.ndarray) -> np.ndarray:
    if metric.root.kind == "euclidean":
        return dirs * s
    return dilate(metric.spec, s, dirs)


def pansu_residual(f: ScalarField, x, L: GroupLinearMap, metric: Metric, scales,
                   directions: int = 200, seed: int = 0, tol: float = 1e-3) -> DiffReport:
    """sup over sampled |h| = s of |f(xh) - f(x) - L(h)| / s, per scale."""
    spec = f.spec
    x = _as_points(spec, x).astype(np.float64)
    scales = np.asarray(scales, dtype=np.float64)
    if np.any(np.diff(scales) >= 0):
        raise InvalidArgument("scales must be strictly descending")
    rng = np.random.default_rng(seed)
    dirs = np.array([[1.0], [-1.0]]) if spec.n == 1 else unit_sphere(metric, directions, rng)
    if spec.m >= 1 and spec.n > 1:
        # make sure the horizontal axes are probed in both orientations
        axes = np.zeros((2 * spec.m, spec.n))
        for i in range(spec.m):
            axes[2 * i, i], axes[2 * i + 1, i] = 1.0, -1.0
        dirs = np.concatenate([axes, dirs])
    fx = float(f(x))
    res = np.empty(len(scales))
    for j, s in enumerate(scales):
        h = _sphere_increments(metric, s, dirs)
        d = metric.norm(h)
        res[j] = float((np.abs(f(mul(spec, x, h)) - fx - L(spec, h)) / d).max())
    pos = res > 0
    if pos.sum() >= 2:
        slope = float(np.polyfit(np.log(scales[pos]), np.log(res[pos]), 1)[0])
    else:
        slope = np.inf
    tail = res[-3:] if len(res) >= 3 else res
    if res[-1] <= tol and res[-1] <= res[0]:
        verdict = "differentiable-evidence"
    elif tail.min() > tol and len(res) >= 3 and slope < 0.25:
        verdict = "nondifferentiable-evidence"
    else:
        verdict = "inconclusive"
    return DiffReport(x, L, scales, res, slope, verdict)


# ---------------------------------------------------------------------------
# Dini derivatives on the line


@dataclass
class DiniReport:
    f_plus: float
    f_minus: float
    subdifferentiable: bool


def dini_pair(g: Callable[[np.ndarray], np.ndarray], a: float, t0: float = 0.1, steps: int = 40,
              tol: float = 1e-9) -> DiniReport:
    """Ladder estimates of the lower-right and upper-left Dini derivatives."""
    t = t0 * 2.0 ** -np.arange(steps)
    # below ~sqrt(eps) the quotients are rounding noise
    t = t[t >= 1e-7 * max(1.0, abs(a))]
    if t.size == 0:
        raise InvalidArgument("t0 is below the rounding floor")
    ga = float(g(np.array([a]))[0])
    fwd = (g(a + t) - ga) / t
    bwd = (ga - g(a - t)) / t
    fp, fm = float(fwd.min()), float(bwd.max())
    return DiniReport(fp, fm, fp >= fm - tol)


# ---------------------------------------------------------------------------
# minimisation experiment


@dataclass
class LemmaReport:
    x0: np.ndarray
    in_E: bool
    eta: float
    c: float
    a: float
    H_x0: float
    H_center: float
    H_boundary_min: float
    grid: int
    extra: dict = field(default_factory=dict)


def _ball_grid(spec: GroupSpec, r: float, k: int) -> np.ndarray:
    w = np.asarray(spec.weights, dtype=np.float64)
    axes = [np.linspace(-1.0, 1.0, k) * r ** wi for wi in w]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, spec.n)


def usefullemma_experiment(F: ScalarField, E: SetOracle, z, r: float, rho: float, theta: float,
                           bump: BumpSpec, h: ScalarField | None = None, metric: Metric | None = None,
                           grid: int = 64, checks: int = 4000, seed: int = 0) -> LemmaReport:
    """Minimise H = F - eta b~ + c h over the ball and report whether the minimiser is in E."""
    spec = F.spec
    m = spec.m
    v = bump.beta
    metric = metric or bump.metric
    z = _as_points(spec, z).astype(np.float64)
    if not 8 * m * theta < rho * r * v:
        raise InvalidArgument(f"precondition 8 m theta < rho r v fails ({8 * m * theta:.4g} >= {rho * r * v:.4g})")
    rng = np.random.default_rng(seed)
    w = np.asarray(spec.weights, dtype=np.float64)

    def in_ball(hh):
        return metric.norm(hh) < r

    # preconditions by sampling
    hs = rng.uniform(-1, 1, (checks * 4, spec.n)) * r ** w
    hs = hs[in_ball(hs)][:checks]
    pts = mul(spec, z, hs)
    if np.abs(F(pts)).max() > theta * (1 + 1e-9):
        raise InvalidArgument("|F| <= theta fails on the ball")
    outside = pts[E.contains(pts) == OUT]
    if len(outside):
        grad = horizontal_gradient(F, outside)
        if np.linalg.norm(grad, axis=-1).min() <= rho:
            raise InvalidArgument("|grad_H F| > rho fails outside E")

    eta = 0.5 * (4.0 * theta / v + rho * r / (2.0 * m))

    def btilde(p):
        return bump(mul(spec, -z, p) * (1.0 / r) ** w)

    gh = _ball_grid(spec, r, grid)
    gh = gh[metric.norm(gh) <= r]
    gp = mul(spec, z, gh)
    if h is None:
        a, c = 0.0, 0.0
    else:
        a = float(np.abs(h(np.concatenate([gp, pts]))).max())
        c = 0.0 if a == 0 else min(theta / (2.0 * a), rho / (4.0 * m * h.lipschitz))

    def H(p):
        out = F(p) - eta * btilde(p)
        if c:
            out = out + c * h(p)
        return out

    vals = H(gp)
    k = int(np.argmin(vals))
    x0 = gp[k]
    # local refinement along the horizontal flows and the last coordinate
    step = 2.0 * r / (grid - 1)
    best = float(vals[k])
    for _ in range(60):
        moved = False
        for i in range(spec.n):
            s = step if i < m else step ** w[i]
            cand = []
            for sg in (-1.0, 1.0):
                e = np.zeros(spec.n)
                e[i] = sg * s
                cand.append(mul(spec, x0, e))
            cand = np.array(cand)
            ok = metric.dist(z, cand) <= r
            if ok.any():
                hv = H(cand[ok])
                j = int(np.argmin(hv))
                if hv[j] < best:
                    best, x0, moved = float(hv[j]), cand[ok][j], True
        if not moved:
            step /= 2.0
            if step < 1e-9 * r:
                break
    # boundary values of H for the separation check
    sph = unit_sphere(metric, 2000, rng)
    bd = mul(spec, z, _sphere_increments(metric, r * (1 - 1e-12), sph))
    h_bd = float(H(bd).min())
    dz = float(metric.dist(z, x0))
    report = LemmaReport(x0, bool(E.contains(x0) == IN), eta, c, a, best, float(H(z)), h_bd,
                         grid, {"dist_to_center": dz})
    if dz >= r * (1 - 1e-6) or best >= h_bd:
        raise ExperimentInvalid("minimiser sits on the boundary of the ball", report.__dict__)
    return report


# ---------------------------------------------------------------------------
# preimages of open sets under the horizontal gradient


@dataclass
class PreimageReport:
    empty: bool
    points: np.ndarray
    profiles: list[PorosityProfile]
    verdicts: list[str]
    oracle: SetOracle | None


def preimage_oracle(f: ScalarField, lo, hi, box, step: float = 1e-4) -> SetOracle:
    """{x in box : grad_H f(x) in the open box (lo, hi)}."""
    lo = np.asarray(lo, dtype=np.float64)
    hi = np.asarray(hi, dtype=np.float64)

    def member(p):
        flat = p.reshape(-1, f.spec.n)
        g = horizontal_gradient(f, flat, step)
        ok = np.all((g > lo) & (g < hi), axis=-1)
        return np.where(ok, IN, OUT).astype(np.int8).reshape(p.shape[:-1])

    box = (np.asarray(box[0], dtype=np.float64), np.asarray(box[1], dtype=np.float64))
    return SetOracle("gradient-preimage", f.spec, member, box)


def preimage_scan(f: ScalarField, lo, hi, box, metric: Metric, grid: int = 20, max_points: int = 20,
                  scales: ScaleConfig | None = None, search: SearchConfig | None = None,
                  lam_min: float = 0.05, seed: int = 0) -> PreimageReport:
    """Sampling-mode porosity profiles at preimage points of a grid."""
    E = preimage_oracle(f, lo, hi, box)
    # cell centres, so the lattice does not sit on level sets at round numbers
    axes = [a + (np.arange(grid) + 0.5) * (b - a) / grid for a, b in zip(*E.box)]
    pts = np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, f.spec.n)
    inside = pts[E.contains(pts) == IN]
    if len(inside) == 0:
        return PreimageReport(True, inside, [], [], E)
    rng = np.random.default_rng(seed)
    if len(inside) > max_points:
        inside = inside[np.sort(rng.choice(len(inside), max_points, replace=False))]
    scales = scales or ScaleConfig(0.25, 0.5, 12)
    search = search or SearchConfig(effort=3, refine=False, samples=64, seed=seed)
    profiles, verdicts = [], []
    for p in inside:
        prof = porosity_profile(E, metric, p, scales, search)
        profiles.append(prof)
        verdicts.append(classify(prof, lam_min, scales.r0 * scales.q ** (scales.count - 1))[0])
    return PreimageReport(False, inside, profiles, verdicts, E)
