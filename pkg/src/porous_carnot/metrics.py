"""Distances on Carnot groups.

Closed-form kinds (euclidean, koranyi, quasi-norm, snowflakes of those) are
vectorised over leading axes.  ``cc-estimate`` runs a small optimal-control
problem per pair and is only meant for spot checks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field, replace

import numpy as np
from scipy import optimize

from . import kernels
from .errors import InvalidArgument, UnsupportedMetric
from .group import GroupSpec, _as_points, horizontal_point, is_heisenberg, mul, mul_raw

ZERO_TIE = 1e-14
KINDS = ("euclidean", "koranyi", "quasi-norm", "cc-estimate", "snowflake")


@dataclass(frozen=True)
class CCSettings:
    segments: int = 64
    iters: int = 400
    penalty: float = 1e4
    starts: int = 4
    seed: int = 0
    round_iters: int = 50


@dataclass(frozen=True)
class CCResult:
    value: float
    controls: np.ndarray = field(repr=False)  # (K, m), piecewise constant on [0, 1]
    defect: float
    converged: bool
    lengths_by_round: tuple[float, ...] = ()

    def curve(self, spec: GroupSpec, start) -> np.ndarray:
        """Vertices of the curve, shape (K + 1, n)."""
        K = self.controls.shape[0]
        pts = [np.asarray(start, dtype=np.float64)]
        for u in self.controls:
            pts.append(mul(spec, pts[-1], horizontal_point(spec, u / K)))
        return np.array(pts)


@dataclass(frozen=True)
class Metric:
    kind: str
    spec: GroupSpec
    eps: float = 1.0
    base: "Metric | None" = None
    cc: CCSettings = CCSettings()

    @property
    def name(self) -> str:
        if self.kind == "snowflake":
            return f"snowflake({self.base.name},{self.eps:g})"
        return self.kind

    @property
    def root(self) -> "Metric":
        """Innermost non-snowflake metric."""
        return self.base.root if self.kind == "snowflake" else self

    @property
    def exponent(self) -> float:
        """Total snowflake exponent relative to :attr:`root`."""
        return self.eps * self.base.exponent if self.kind == "snowflake" else 1.0

    def dist(self, a, b) -> np.ndarray:
        return dist(self, self.spec, a, b)

    def norm(self, h) -> np.ndarray:
        h = _as_points(self.spec, h)
        return self.dist(np.zeros_like(h), h)

    def sample_ball(self, center, rho: float, size: int, rng: np.random.Generator) -> np.ndarray:
        """Uniform-in-coordinates samples of the open ball B(center, rho)."""
        return sample_ball(self, center, rho, size, rng)


def make_metric(kind: str, spec: GroupSpec, **kw) -> Metric:
    """Build a metric; ``kind`` may be ``snowflake:<base>:<eps>``."""
    if kind.startswith("snowflake"):
        parts = kind.split(":")
        if len(parts) != 3:
            raise InvalidArgument("snowflake metrics are written snowflake:<base>:<eps>")
        return snowflake(make_metric(parts[1], spec, **kw), float(parts[2]))
    if kind not in KINDS:
        raise UnsupportedMetric(f"unknown metric {kind!r}; choose from {', '.join(KINDS)}")
    if kind == "koranyi" and not is_heisenberg(spec):
        raise UnsupportedMetric("the Koranyi distance is only defined here on H^1")
    return Metric(kind, spec, **kw)


def snowflake(base: Metric, eps: float) -> Metric:
    if not 0 < eps < 1:
        raise InvalidArgument(f"snowflake exponent must lie in (0, 1), got {eps}")
    return Metric("snowflake", base.spec, eps=eps, base=base, cc=base.cc)


def dist(metric: Metric, spec: GroupSpec, a, b) -> np.ndarray:
    a = _as_points(spec, a)
    b = _as_points(spec, b)
    kind = metric.kind
    if kind == "euclidean":
        d = np.sqrt(((b - a) ** 2).sum(-1))
    elif kind == "koranyi":
        if not is_heisenberg(spec):
            raise UnsupportedMetric("the Koranyi distance is only defined here on H^1")
        d = kernels.koranyi_dist(a, b)
    elif kind == "quasi-norm":
        h = mul(spec, -a, b)
        w = np.asarray(spec.weights, dtype=np.float64)
        d = (np.abs(h) ** (1.0 / w)).sum(-1)
    elif kind == "snowflake":
        return dist(metric.base, spec, a, b) ** metric.eps
    elif kind == "cc-estimate":
        shape = np.broadcast_shapes(a.shape, b.shape)
        aa = np.broadcast_to(a, shape).reshape(-1, spec.n)
        bb = np.broadcast_to(b, shape).reshape(-1, spec.n)
        d = np.array([cc_estimate(spec, x, y, metric.cc).value for x, y in zip(aa, bb)])
        d = d.reshape(shape[:-1])
    else:
        raise UnsupportedMetric(f"unknown metric kind {kind!r}")
    d = np.asarray(d, dtype=np.float64)
    return np.where(d < ZERO_TIE, 0.0, d)


def koranyi_norm(p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    rr = p[..., 0] ** 2 + p[..., 1] ** 2
    return np.sqrt(np.sqrt(rr * rr + p[..., 2] ** 2))


def koranyi_lower_bound(p) -> np.ndarray:
    """max(|(x, y)|, sqrt|t|), never larger than the Koranyi norm."""
    p = np.asarray(p, dtype=np.float64)
    return np.maximum(np.hypot(p[..., 0], p[..., 1]), np.sqrt(np.abs(p[..., 2])))


# ---------------------------------------------------------------------------
# ball sampling


def _unit_ball_euclid(size, n, rng):
    g = rng.standard_normal((size, n))
    g /= np.linalg.norm(g, axis=1, keepdims=True)
    return g * rng.uniform(0, 1, (size, 1)) ** (1.0 / n)


def sample_ball(metric: Metric, center, rho: float, size: int, rng: np.random.Generator) -> np.ndarray:
    spec = metric.spec
    center = _as_points(spec, center)
    if rho <= 0:
        return np.empty((0, spec.n))
    kind = metric.kind
    if kind == "snowflake":
        return sample_ball(metric.base, center, rho ** (1.0 / metric.eps), size, rng)
    if kind == "euclidean":
        return center + rho * _unit_ball_euclid(size, spec.n, rng)
    if kind in ("koranyi", "quasi-norm"):
        w = np.asarray(spec.weights, dtype=np.float64)
        half = rho ** w
        out = []
        have = 0
        while have < size:
            h = rng.uniform(-1, 1, (2 * size + 16, spec.n)) * half
            if kind == "koranyi":
                ok = koranyi_norm(h) < rho
            else:
                ok = (np.abs(h) ** (1.0 / w)).sum(-1) < rho
            h = h[ok]
            out.append(h)
            have += len(h)
        h = np.concatenate(out)[:size]
        return mul(spec, center, h)
    raise UnsupportedMetric(f"ball sampling is not available for {metric.name}")


def unit_sphere(metric: Metric, count: int, rng: np.random.Generator) -> np.ndarray:
    """``count`` points h with metric.norm(h) == 1 (up to rounding)."""
    spec = metric.spec
    root = metric.root
    g = rng.standard_normal((count, spec.n))
    if root.kind == "euclidean":
        return g / np.linalg.norm(g, axis=1, keepdims=True)
    w = np.asarray(spec.weights, dtype=np.float64)
    if root.kind in ("koranyi", "quasi-norm"):
        nrm = root.norm(g)
        return g * (1.0 / nrm[:, None]) ** w
    raise UnsupportedMetric(f"sphere sampling is not available for {metric.name}")


# ---------------------------------------------------------------------------
# Carnot-Caratheodory distance by direct transcription


def _endpoint(spec: GroupSpec, v: np.ndarray) -> np.ndarray:
    """Product of horizontal increments; v has shape (..., K, m)."""
    x = np.zeros(v.shape[:-2] + (spec.n,), dtype=v.dtype)
    inc = np.zeros(v.shape[:-1] + (spec.n,), dtype=v.dtype)
    inc[..., :spec.m] = v
    for k in range(v.shape[-2]):
        x = mul_raw(spec, x, inc[..., k, :])
    return x


def _endpoint_jac(spec: GroupSpec, v: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    """Endpoint and its Jacobian (n, K*m) by complex-step differentiation."""
    K, m = v.shape
    nv = K * m
    hstep = 1e-30
    batch = np.repeat(v[None].astype(np.complex128), nv + 1, axis=0)
    idx = np.arange(nv)
    batch[idx + 1, idx // m, idx % m] += 1j * hstep
    ends = _endpoint(spec, batch)
    return ends[0].real, (ends[1:].imag / hstep).T


def _project(spec, v, target, steps=30, tol=1e-13):
    """Minimum-norm Gauss-Newton correction onto the endpoint constraint."""
    K, m = v.shape
    for _ in range(steps):
        end, J = _endpoint_jac(spec, v)
        res = end - target
        if np.abs(res).max() < tol:
            break
        dv, *_ = np.linalg.lstsq(J, -res, rcond=None)
        v = v + dv.reshape(K, m)
    end = _endpoint(spec, v)
    return v, float(np.abs(end - target).max())


def _initial_guesses(spec, target, K, starts, rng):
    m = spec.m
    base = np.tile(target[:m] / K, (K, 1))
    guesses = [base]
    if m >= 2:
        th = 2 * np.pi * (np.arange(K) + 0.5) / K
        circ = np.zeros((K, m))
        circ[:, 0] = np.cos(th)
        circ[:, 1] = np.sin(th)
        vert = float(np.abs(target[m:]).sum())
        amp = math.sqrt(max(vert, 1e-12)) * 2 * np.pi / K
        flipped = circ.copy()
        flipped[:, 1] *= -1.0
        guesses += [base + amp * circ, base + amp * flipped]
    scale = max(float(np.abs(target).max()) ** 0.5, 1e-3) / K
    while len(guesses) < starts:
        guesses.append(base + scale * rng.standard_normal((K, m)))
    return guesses[:max(starts, 1)]


def cc_estimate(spec: GroupSpec, a, b, cfg: CCSettings | None = None) -> CCResult:
    """Upper estimate of d_c(a, b) from piecewise-constant horizontal controls.

    Minimises the energy of ``K`` equal-time horizontal segments subject to
    the endpoint constraint (quadratic penalty, then SLSQP in rounds, each
    round followed by a Gauss-Newton projection onto the constraint).  The
    reported value is the best projected length over all completed rounds, so
    a larger iteration budget never increases it.
    """
    cfg = cfg or CCSettings()
    a = _as_points(spec, a)
    b = _as_points(spec, b)
    target = mul(spec, -a, b)
    K, m = cfg.segments, spec.m
    if np.abs(target).max() < ZERO_TIE:
        return CCResult(0.0, np.zeros((K, m)), 0.0, True)
    rng = np.random.default_rng(cfg.seed)
    guesses = _initial_guesses(spec, target, K, cfg.starts, rng)
    rounds = max(1, cfg.iters // (cfg.round_iters * len(guesses)))

    def energy(x):
        return K * float(x @ x), 2 * K * x

    best = (np.inf, None, np.inf)
    history = []
    for g in guesses:
        x = g.ravel().copy()
        # penalty homotopy
        mu = 10.0
        while mu <= cfg.penalty:
            def pen(x, mu=mu):
                end, J = _endpoint_jac(spec, x.reshape(K, m))
                r = end - target
                e, de = energy(x)
                return e + mu * float(r @ r), de + 2 * mu * (J.T @ r)
            x = optimize.minimize(pen, x, jac=True, method="L-BFGS-B",
                                  options={"maxiter": 200}).x
            mu *= 10.0
        for _ in range(rounds):
            cons = {"type": "eq",
                    "fun": lambda x: _endpoint(spec, x.reshape(K, m)) - target,
                    "jac": lambda x: _endpoint_jac(spec, x.reshape(K, m))[1]}
            res = optimize.minimize(energy, x, jac=True, method="SLSQP", constraints=[cons],
                                    options={"maxiter": cfg.round_iters, "ftol": 1e-14})
            x = res.x
            v, defect = _project(spec, x.reshape(K, m), target)
            x = v.ravel()
            length = float(np.linalg.norm(v, axis=1).sum())
            if defect < 1e-9 and length < best[0]:
                best = (length, v.copy(), defect)
            history.append(best[0])
    if best[1] is None:
        v, defect = _project(spec, guesses[0], target)
        length = float(np.linalg.norm(v, axis=1).sum())
        return CCResult(length, v * K, defect, False, tuple(history))
    value, v, defect = best
    return CCResult(value, v * K, defect, True, tuple(history))
