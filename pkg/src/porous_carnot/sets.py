"""Set oracles: the cone and cusp of H^1, their ladder subsets, and Cantor sets.

Membership codes are small ints (0 out, 1 in, 2 undecided) so they can be
returned as arrays.  ``dist_lower`` is a certified lower bound on the distance
to the set in the requested metric, or ``None`` when no bound is known.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, field
from fractions import Fraction
from typing import Callable

import numpy as np

from . import kernels
from .cantor import Membership, ank_member, cantor_member
from .errors import InvalidArgument, UnsupportedMetric
from .group import GroupSpec, _as_points, euclidean_spec, heisenberg_spec
from .metrics import Metric, koranyi_norm

OUT, IN, UNDECIDED = int(Membership.OUT), int(Membership.IN), int(Membership.UNDECIDED)
SQRT15 = math.sqrt(15.0)


@dataclass(frozen=True)
class SetOracle:
    name: str
    spec: GroupSpec
    member: Callable[[np.ndarray], np.ndarray]
    box: tuple[np.ndarray, np.ndarray]
    dist_lower_fn: Callable[[np.ndarray, str], np.ndarray] | None = None
    # root metric kinds the bound is valid for
    metric_tags: tuple[str, ...] = ()
    witness_fn: Callable[[np.ndarray, float, Metric], np.ndarray] | None = field(default=None, repr=False)

    def contains(self, pts) -> np.ndarray:
        return self.member(_as_points(self.spec, pts))

    def dist_lower(self, pts, metric: Metric) -> np.ndarray | None:
        """Certified lower bound on d(pts, E), or None if unavailable for ``metric``."""
        root = metric.root
        if self.dist_lower_fn is None or root.kind not in self.metric_tags:
            return None
        d = self.dist_lower_fn(_as_points(self.spec, pts), root.kind)
        return d ** metric.exponent

    def witnesses(self, base, r: float, metric: Metric) -> np.ndarray:
        if self.witness_fn is None:
            return np.empty((0, self.spec.n))
        return self.witness_fn(np.asarray(base, dtype=np.float64), r, metric)


def _radius(p):
    return np.hypot(p[..., 0], p[..., 1])


def _require_h1(kind):
    if kind not in ("euclidean", "koranyi"):
        raise UnsupportedMetric(kind)


# ---------------------------------------------------------------------------
# cone and cusp


def _cone_in(p):
    return np.abs(p[..., 2]) <= _radius(p)


def _cusp_in(p):
    r = _radius(p)
    return np.abs(p[..., 2]) >= 2.0 * r * r


def _cone_lower(p, kind):
    R = _radius(p)
    excess = np.maximum(np.abs(p[..., 2]) - R, 0.0)
    if kind == "euclidean":
        return excess / math.sqrt(2.0)
    # d^2 + (2R+1) d >= |t| - R for any d = d_k(p, cone point)
    b = 2.0 * R + 1.0
    return 2.0 * excess / (b + np.sqrt(b * b + 4.0 * excess))


def _cusp_lower(p, kind, grid=257):
    R = _radius(p)
    t = np.abs(p[..., 2])
    outside = t < 2.0 * R * R
    if kind == "koranyi":
        # d^2 - 6Rd + 2R^2 - |t| <= 0 for any d = d_k(p, cusp point)
        d = 3.0 * R - np.sqrt(7.0 * R * R + t)
        return np.where(outside, np.maximum(d, 0.0), 0.0)
    # meridian-plane distance to the curve t = 2 rho^2, 0 <= rho <= R, minimised on
    # a grid; the distance to a curve point is sqrt(1 + 16 R^2)-Lipschitz in rho
    rho = np.linspace(0.0, 1.0, grid) * R[..., None]
    dd = np.sqrt((R[..., None] - rho) ** 2 + (t[..., None] - 2.0 * rho ** 2) ** 2).min(-1)
    slack = np.sqrt(1.0 + 16.0 * R * R) * R / (2.0 * (grid - 1))
    return np.where(outside, np.maximum(dd - slack, 0.0), 0.0)


def _h1_box(height):
    return np.array([-1.0, -1.0, -height]), np.array([1.0, 1.0, height])


def _codes(mask):
    return np.where(mask, IN, OUT).astype(np.int8)


def cone_lambda() -> SetOracle:
    """{|t| <= |(x, y)|} in H^1."""
    return SetOracle("lambda", heisenberg_spec(), lambda p: _codes(_cone_in(p)), _h1_box(1.0),
                     _cone_lower, ("euclidean", "koranyi"))


def cusp_upsilon() -> SetOracle:
    """{|t| >= 2 |(x, y)|^2} in H^1."""
    return SetOracle("upsilon", heisenberg_spec(), lambda p: _codes(_cusp_in(p)), _h1_box(2.0),
                     _cusp_lower, ("euclidean", "koranyi"))


# ---------------------------------------------------------------------------
# ladder subsets


def _ladder_member(p, shape_in, depth):
    p = np.asarray(p, dtype=np.float64)
    flat = p.reshape(-1, 3)
    out = np.zeros(flat.shape[0], dtype=np.int8)
    R = _radius(flat)
    origin = (R == 0.0) & (flat[:, 2] == 0.0)
    out[origin] = IN
    # only radii with zero certified gap need the exact scan
    maybe = shape_in(flat) & ~origin & (R > 0.0) & (kernels.ladder_gap(R) == 0.0)
    for i in np.flatnonzero(maybe):
        _, status = ank_member(float(R[i]), depth)
        out[i] = int(status)
    return out.reshape(p.shape[:-1])


def _ladder_lower(p, kind):
    # |R(p) - R(q)| <= d(p, q) for both metrics; radii of the set lie in {0} U A
    return kernels.ladder_gap(_radius(p))


def _unit(p):
    R = _radius(p)
    if R == 0.0:
        return np.array([1.0, 0.0]), 0.0
    return p[:2] / R, R


def _ladder_witnesses(kind_t):
    def gen(base, r, metric):
        root = metric.root.kind
        _require_h1(root)
        rr = r ** (1.0 / metric.exponent)  # radius in the root metric
        u, R = _unit(base)
        fr = np.arange(1, 65) / 64.0
        s = fr * rr
        out = []
        # radial moves, outwards and inwards: distance s in both metrics
        for sign in (1.0, -1.0):
            ss = s if sign > 0 else s[s < R]
            c = np.empty((len(ss), 3))
            c[:, :2] = base[:2] + sign * ss[:, None] * u
            c[:, 2] = base[2]
            out.append(c)
        # vertical moves
        v = s if root == "euclidean" else s * s
        for sign in (1.0, -1.0):
            c = np.tile(base, (len(v), 1))
            c[:, 2] += sign * v
            out.append(c)
        if R > 0.0 and kind_t == "cone" and root == "koranyi":
            out.append(np.array([witness_ps_case1(base, x / 2.0) for x in s]))
        if R > 0.0 and kind_t == "cusp":
            q = s / math.sqrt(2.0) if root == "euclidean" else s
            out.append(np.array([witness_qs(base, x) for x in q if x < R]).reshape(-1, 3))
        return np.concatenate(out)
    return gen


def pe_set(depth: int = 40) -> SetOracle:
    """Cone points whose horizontal radius lies on the ladder, plus the origin."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")

    def lower(p, kind):
        return np.maximum(_ladder_lower(p, kind), _cone_lower(p, kind))

    return SetOracle("pe", heisenberg_spec(), lambda p: _ladder_member(p, _cone_in, depth),
                     _h1_box(1.0), lower, ("euclidean", "koranyi"), _ladder_witnesses("cone"))


def pc_set(depth: int = 40) -> SetOracle:
    """Cusp points whose horizontal radius lies on the ladder, plus the origin."""
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")

    def lower(p, kind):
        return np.maximum(_ladder_lower(p, kind), _cusp_lower(p, kind))

    return SetOracle("pc", heisenberg_spec(), lambda p: _ladder_member(p, _cusp_in, depth),
                     _h1_box(2.0), lower, ("euclidean", "koranyi"), _ladder_witnesses("cusp"))


def shell_set(n: int = 1, k: int = 0, depth: int = 40) -> SetOracle:
    """All points of H^1 whose horizontal radius lies in the single ladder set A_{n,k}."""
    from .cantor import LadderIndex
    idx = LadderIndex(n, k)
    lo, length = float(idx.lo), float(idx.length)

    def member(p):
        u = (_radius(p) - lo) / length
        return _cantor_codes(u, depth)

    def lower(p, kind):
        # |R(p) - R(q)| <= d(p, q) in both metrics
        return length * _cantor_lower((_radius(p) - lo) / length)

    return SetOracle(f"shell-{n}-{k}", heisenberg_spec(), member, _h1_box(1.0),
                     lower, ("euclidean", "koranyi"))


# ---------------------------------------------------------------------------
# witness points


def _split(base):
    base = np.asarray(base, dtype=np.float64)
    if base.shape != (3,):
        raise InvalidArgument("witnesses take a single H^1 point")
    R = math.hypot(base[0], base[1])
    if R == 0.0:
        raise InvalidArgument("witness points need a nonzero horizontal part")
    return base, R


def _sign(t):
    return -1.0 if t < 0 else 1.0


def witness_ps_case1(base, s: float) -> np.ndarray:
    """Radial step s with vertical correction; Koranyi distance 2s."""
    base, R = _split(base)
    x, y, t = base
    return np.array([x + s * x / R, y + s * y / R, t - _sign(t) * SQRT15 * s * s])


def witness_ps_case2(base, s: float) -> np.ndarray:
    """Radial step s at fixed height; distance s in both metrics."""
    base, R = _split(base)
    x, y, t = base
    return np.array([x + s * x / R, y + s * y / R, t])


def witness_qs(base, s: float) -> np.ndarray:
    """Inward radial step s combined with a vertical step s (away from t = 0)."""
    base, R = _split(base)
    if not 0 <= s < R:
        raise InvalidArgument(f"need 0 <= s < |(x, y)| = {R}, got {s}")
    x, y, t = base
    return np.array([x - s * x / R, y - s * y / R, t + _sign(t) * s])


# ---------------------------------------------------------------------------
# one-dimensional sets and products


def _cantor_codes(u, depth):
    u = np.asarray(u, dtype=np.float64)
    flat = u.reshape(-1)
    out = np.zeros(flat.shape[0], dtype=np.int8)
    inside = (flat >= 0.0) & (flat <= 1.0)
    gap = np.zeros_like(flat)
    gap[inside] = kernels.cantor_gap(flat[inside])
    for i in np.flatnonzero(inside & (gap == 0.0)):
        out[i] = int(cantor_member(float(flat[i]), depth))
    return out.reshape(u.shape)


def _cantor_lower(u):
    u = np.asarray(u, dtype=np.float64)
    flat = u.reshape(-1)
    out = np.maximum(np.maximum(-flat, flat - 1.0), 0.0)
    inside = (flat > 0.0) & (flat < 1.0)
    out[inside] = kernels.cantor_gap(flat[inside])
    return out.reshape(u.shape)


def cantor_oracle(depth: int = 40) -> SetOracle:
    """Middle-third Cantor set in R."""
    spec = euclidean_spec(1)
    return SetOracle("cantor", spec, lambda p: _cantor_codes(p[..., 0], depth),
                     (np.array([0.0]), np.array([1.0])),
                     lambda p, kind: _cantor_lower(p[..., 0]), ("euclidean",))


def _digit_member(u: Fraction, base: int, digits: frozenset, depth: int) -> int:
    if u < 0 or u > 1:
        return OUT
    if u == 1:
        return IN if base - 1 in digits else OUT
    r, den = u.numerator, u.denominator
    seen = {r}
    for _ in range(depth):
        d, r = divmod(r * base, den)
        if d not in digits:
            # a terminating expansion also reads as (d - 1)(base - 1)(base - 1)...
            alt = r == 0 and d - 1 in digits and base - 1 in digits
            return IN if alt else OUT
        if r == 0 or r in seen:
            return IN
        seen.add(r)
    return UNDECIDED


def _digit_gap(u, base, digits, depth=60):
    """Distance from u in [0, 1] to the digit Cantor set (needs 0 and base-1 allowed)."""
    allowed = np.zeros(base + 1, dtype=bool)
    allowed[list(digits)] = True
    u = np.array(u, dtype=np.float64, copy=True)
    out = np.zeros_like(u)
    scale = np.ones_like(u)
    live = (u > 0.0) & (u < 1.0)
    left_end = np.array([max([e for e in digits if e < d], default=0) + 1 for d in range(base)]) / base
    right_start = np.array([min([e for e in digits if e > d], default=base) for d in range(base)]) / base
    for _ in range(depth):
        if not live.any():
            break
        d = np.minimum(np.floor(base * u), base - 1).astype(int)
        hole = live & ~allowed[d]
        if hole.any():
            dh = d[hole]
            g = np.minimum(u[hole] - left_end[dh], right_start[dh] - u[hole])
            out[hole] = scale[hole] * np.maximum(g - kernels.GAP_SLACK, 0.0)
        live &= ~hole
        u = np.where(live, base * u - d, u)
        scale = np.where(live, scale / base, scale)
    return out


def digit_cantor_oracle(base: int = 4, digits=(0, 3), offset: float = 0.0, width: float = 1.0,
                        depth: int = 60, name: str | None = None) -> SetOracle:
    """offset + width * {sum_k d_k base^-k : d_k in digits} as a subset of R."""
    digits = frozenset(int(d) for d in digits)
    if base < 2 or not digits <= set(range(base)) or len(digits) >= base:
        raise InvalidArgument("digits must be a proper subset of range(base)")
    if 0 not in digits or base - 1 not in digits:
        raise InvalidArgument("digit sets must contain 0 and base - 1")
    if not width > 0:
        raise InvalidArgument("width must be positive")
    off, wid = Fraction(offset), Fraction(width)
    spec = euclidean_spec(1)

    def member(p):
        x = np.asarray(p, dtype=np.float64)[..., 0]
        flat = x.reshape(-1)
        out = np.zeros(flat.shape[0], dtype=np.int8)
        u = (flat - offset) / width
        inside = (u >= 0.0) & (u <= 1.0)
        gap = np.ones_like(flat)
        gap[inside] = _digit_gap(u[inside], base, digits)
        for i in np.flatnonzero(inside & (gap == 0.0)):
            out[i] = _digit_member((Fraction(float(flat[i])) - off) / wid, base, digits, depth)
        return out.reshape(x.shape)

    def lower(p, kind):
        u = (np.asarray(p, dtype=np.float64)[..., 0] - offset) / width
        flat = u.reshape(-1)
        out = np.maximum(np.maximum(-flat, flat - 1.0), 0.0)
        inside = (flat > 0.0) & (flat < 1.0)
        out[inside] = _digit_gap(flat[inside], base, digits)
        return (width * out).reshape(u.shape)

    label = name or f"cantor{base}{''.join(map(str, sorted(digits)))}"
    return SetOracle(label, spec, member, (np.array([offset]), np.array([offset + width])),
                     lower, ("euclidean",))


def whole_space(spec: GroupSpec, box=None) -> SetOracle:
    box = box or (-np.ones(spec.n), np.ones(spec.n))
    return SetOracle("all", spec, lambda p: np.full(p.shape[:-1], IN, dtype=np.int8),
                     box, lambda p, kind: np.zeros(p.shape[:-1]), ("euclidean", "koranyi", "quasi-norm"))


def empty_set(spec: GroupSpec, box=None) -> SetOracle:
    box = box or (-np.ones(spec.n), np.ones(spec.n))
    return SetOracle("empty", spec, lambda p: np.zeros(p.shape[:-1], dtype=np.int8),
                     box, lambda p, kind: np.full(p.shape[:-1], np.inf), ("euclidean", "koranyi", "quasi-norm"))


def point_set(spec: GroupSpec, point=None, box=None) -> SetOracle:
    """A single point (the identity by default)."""
    pt = spec.zero() if point is None else _as_points(spec, point)
    box = box or (-np.ones(spec.n), np.ones(spec.n))

    def lower(p, kind):
        from .metrics import make_metric
        return make_metric(kind, spec).dist(p, pt)

    return SetOracle("point", spec, lambda p: _codes(np.all(p == pt, axis=-1)), box,
                     lower, ("euclidean", "koranyi", "quasi-norm"))


def product_oracle(f_oracle: SetOracle, spec: GroupSpec) -> SetOracle:
    """F x R^{n-1}: membership decided by the first coordinate."""
    if f_oracle.spec.n != 1:
        raise InvalidArgument("product_oracle needs a one-dimensional factor")
    if spec.m < 1:
        raise InvalidArgument("first coordinate must be horizontal")
    lo, hi = f_oracle.box
    box = (np.concatenate([lo, -np.ones(spec.n - 1)]), np.concatenate([hi, np.ones(spec.n - 1)]))
    lower = None
    if f_oracle.dist_lower_fn is not None:
        # every listed metric dominates |x_1 - y_1|
        def lower(p, kind):
            return f_oracle.dist_lower_fn(p[..., :1], "euclidean")
    return SetOracle(f"{f_oracle.name}-product", spec, lambda p: f_oracle.member(p[..., :1]), box,
                     lower, ("euclidean", "koranyi", "quasi-norm"))


REGISTRY: dict[str, Callable[[], SetOracle]] = {
    "lambda": cone_lambda,
    "upsilon": cusp_upsilon,
    "pe": pe_set,
    "pc": pc_set,
    "cantor": cantor_oracle,
    "cantor-product": lambda: product_oracle(cantor_oracle(), heisenberg_spec()),
}


def get_set(name: str, depth: int | None = None) -> SetOracle:
    if name not in REGISTRY:
        raise InvalidArgument(f"unknown set {name!r}; known sets: {', '.join(REGISTRY)}")
    if depth is not None and name in ("pe", "pc", "cantor"):
        return REGISTRY[name](depth)
    return REGISTRY[name]()
