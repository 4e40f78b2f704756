"""Carnot groups in exponential coordinates of the first kind.

A group is ``R^n`` with the polynomial law

    (p q)_i = p_i + q_i + R_i(p, q)

where ``R_i`` vanishes on the horizontal coordinates and only involves
coordinates of lower index.  Laws are given as sparse monomial tables, so any
step is supported as long as the caller supplies the polynomials.

Points are plain ``numpy`` arrays whose last axis has length ``n``; every
operation broadcasts over leading axes.
"""
from __future__ import annotations

import json
from dataclasses import dataclass, field
from pathlib import Path
from typing import Sequence

import numpy as np

from . import kernels
from .errors import InternalError, InvalidArgument, InvalidSpec


@dataclass(frozen=True)
class Monomial:
    """``coef * prod(p[i] for i in p_idx) * prod(q[j] for j in q_idx)`` (0-based)."""

    coef: float
    p_idx: tuple[int, ...] = ()
    q_idx: tuple[int, ...] = ()


@dataclass(frozen=True)
class GroupSpec:
    n: int
    m: int
    weights: tuple[int, ...]
    law: tuple[tuple[Monomial, ...], ...]
    name: str = "custom"
    _heisenberg: bool = field(default=False, repr=False, compare=False)

    def __post_init__(self):
        _validate_static(self)

    @property
    def step(self) -> int:
        return max(self.weights)

    def zero(self) -> np.ndarray:
        return np.zeros(self.n)

    def to_json(self) -> dict:
        law = []
        for i, monos in enumerate(self.law):
            if not monos:
                continue
            law.append({
                "i": i + 1,
                "monomials": [{"coef": mo.coef, "p": [k + 1 for k in mo.p_idx],
                               "q": [k + 1 for k in mo.q_idx]} for mo in monos],
            })
        return {"name": self.name, "n": self.n, "m": self.m,
                "weights": list(self.weights), "law": law}


def _validate_static(spec: GroupSpec) -> None:
    n, m = spec.n, spec.m
    if n < 1 or not 1 <= m <= n:
        raise InvalidSpec(f"need 1 <= m <= n, got n={n}, m={m}")
    if len(spec.weights) != n or len(spec.law) != n:
        raise InvalidSpec("weights and law must have one entry per coordinate")
    w = spec.weights
    if any(wi < 1 for wi in w) or any(b < a for a, b in zip(w, w[1:])):
        raise InvalidSpec("weights must be positive and nondecreasing")
    if any(wi != 1 for wi in w[:m]) or any(wi == 1 for wi in w[m:]):
        raise InvalidSpec("weight 1 must occur exactly on the first m coordinates")
    for i, monos in enumerate(spec.law):
        if i < m and monos:
            raise InvalidSpec(f"R_{i + 1} must vanish on horizontal coordinates")
        for mo in monos:
            idx = mo.p_idx + mo.q_idx
            if any(k < 0 or k >= i for k in idx):
                raise InvalidSpec(f"R_{i + 1} may only use coordinates of lower index")
            if sum(w[k] for k in idx) != w[i]:
                raise InvalidSpec(f"monomial {mo} in R_{i + 1} is not homogeneous of degree {w[i]}")


def validate(spec: GroupSpec, trials: int = 200, seed: int = 0, tol: float = 1e-9) -> None:
    """Stochastic associativity / identity / inverse / dilation checks."""
    rng = np.random.default_rng(seed)
    p, q, r = rng.uniform(-2, 2, size=(3, trials, spec.n))
    z = np.zeros(spec.n)
    lhs = mul(spec, mul(spec, p, q), r)
    rhs = mul(spec, p, mul(spec, q, r))
    scale = 1.0 + np.abs(lhs).max()
    if np.abs(lhs - rhs).max() > tol * scale:
        raise InvalidSpec("group law is not associative")
    if np.abs(mul(spec, p, z) - p).max() > 0 or np.abs(mul(spec, z, p) - p).max() > 0:
        raise InvalidSpec("zero is not the identity")
    if np.abs(mul(spec, p, -p)).max() > tol * scale:
        raise InvalidSpec("coordinate negation is not the inverse")
    for lam in (0.5, 2.0):
        d1 = dilate(spec, lam, mul(spec, p, q))
        d2 = mul(spec, dilate(spec, lam, p), dilate(spec, lam, q))
        if np.abs(d1 - d2).max() > tol * (1.0 + np.abs(d1).max()):
            raise InvalidSpec("dilations are not homomorphisms")


def make_spec(n: int, m: int, weights: Sequence[int], law: dict[int, list[Monomial]] | Sequence,
              name: str = "custom", check: bool = True, _heisenberg: bool = False) -> GroupSpec:
    if isinstance(law, dict):
        table = tuple(tuple(law.get(i, ())) for i in range(n))
    else:
        table = tuple(tuple(x) for x in law)
    spec = GroupSpec(n, m, tuple(int(w) for w in weights), table, name, _heisenberg)
    if check:
        validate(spec)
    return spec


def spec_from_json(doc: dict | str | Path, check: bool = True) -> GroupSpec:
    """Load a spec from a JSON document (dict, JSON text or path).

    Coordinate labels in the document (``"i"``, ``"p"``, ``"q"``) are 1-based.
    """
    if isinstance(doc, Path) or (isinstance(doc, str) and not doc.lstrip().startswith("{")):
        doc = json.loads(Path(doc).read_text())
    elif isinstance(doc, str):
        doc = json.loads(doc)
    try:
        n, m = int(doc["n"]), int(doc["m"])
        law: dict[int, list[Monomial]] = {}
        for entry in doc.get("law", []):
            i = int(entry["i"]) - 1
            if not 0 <= i < n:
                raise InvalidSpec(f"law entry for coordinate {i + 1} out of range")
            law.setdefault(i, []).extend(
                Monomial(float(mo["coef"]), tuple(int(k) - 1 for k in mo.get("p", [])),
                         tuple(int(k) - 1 for k in mo.get("q", [])))
                for mo in entry["monomials"])
        weights = doc["weights"]
    except (KeyError, TypeError) as exc:
        raise InvalidSpec(f"malformed group document: {exc}") from exc
    return make_spec(n, m, weights, law, name=doc.get("name", "custom"), check=check)


def is_heisenberg(spec: GroupSpec) -> bool:
    return spec._heisenberg or (spec.n == 3 and spec.m == 2 and spec.law == _H1_LAW)


def heisenberg_spec(k: int = 1) -> GroupSpec:
    """Heisenberg group H^k, coordinates (x_1..x_k, y_1..y_k, t).

    For k = 1 the law is (x,y,t)(x',y',t') = (x+x', y+y', t+t'-2(xy'-yx')).
    """
    n = 2 * k + 1
    monos = []
    for j in range(k):
        monos.append(Monomial(-2.0, (j,), (k + j,)))
        monos.append(Monomial(2.0, (k + j,), (j,)))
    return make_spec(n, 2 * k, [1] * (2 * k) + [2], {n - 1: monos},
                     name="heisenberg" if k == 1 else f"heisenberg{k}", _heisenberg=(k == 1))


def engel_spec() -> GroupSpec:
    """Engel group (step 3): [X1,X2]=X3, [X1,X3]=X4, via the truncated BCH series."""
    law = {
        2: [Monomial(0.5, (0,), (1,)), Monomial(-0.5, (1,), (0,))],
        3: [Monomial(0.5, (0,), (2,)), Monomial(-0.5, (2,), (0,)),
            # (p1 - q1)(p1 q2 - p2 q1) / 12
            Monomial(1 / 12, (0, 0), (1,)), Monomial(-1 / 12, (0, 1), (0,)),
            Monomial(-1 / 12, (0,), (0, 1)), Monomial(1 / 12, (1,), (0, 0))],
    }
    return make_spec(4, 2, [1, 1, 2, 3], law, name="engel")


def euclidean_spec(n: int = 1) -> GroupSpec:
    """Abelian group R^n (step 1)."""
    return make_spec(n, n, [1] * n, {}, name=f"R{n}")


def _as_points(spec: GroupSpec, p) -> np.ndarray:
    p = np.asarray(p, dtype=np.float64)
    if p.ndim == 0 or p.shape[-1] != spec.n:
        raise InvalidArgument(f"expected points with last axis {spec.n}, got shape {p.shape}")
    return p


def mul(spec: GroupSpec, p, q) -> np.ndarray:
    return mul_raw(spec, _as_points(spec, p), _as_points(spec, q))


def mul_raw(spec: GroupSpec, p: np.ndarray, q: np.ndarray) -> np.ndarray:
    """Group product without validation or casting (complex input allowed)."""
    if spec._heisenberg:
        return kernels.heis_mul(p, q)
    out = p + q
    for i, monos in enumerate(spec.law):
        for mo in monos:
            term = mo.coef
            for k in mo.p_idx:
                term = term * p[..., k]
            for k in mo.q_idx:
                term = term * q[..., k]
            out[..., i] = out[..., i] + term
    return out


def inv(spec: GroupSpec, p) -> np.ndarray:
    return -_as_points(spec, p)


def dilate(spec: GroupSpec, lam, p) -> np.ndarray:
    """delta_lam(p); ``lam`` may be a scalar or one factor per point."""
    lam = np.asarray(lam, dtype=np.float64)
    if not np.all(lam > 0):
        raise InvalidArgument(f"dilation factor must be positive, got {lam}")
    p = _as_points(spec, p)
    if lam.ndim and lam.shape[-1] == 1:
        lam = lam[..., 0]
    return p * np.power(lam[..., None], np.asarray(spec.weights, dtype=np.float64))


def project_horizontal(spec: GroupSpec, p) -> np.ndarray:
    return _as_points(spec, p)[..., :spec.m].copy()


def exp_horizontal(spec: GroupSpec, x, i: int, t) -> np.ndarray:
    """``x exp(t X_i)`` for a horizontal basis vector (1-based ``i``)."""
    if not 1 <= i <= spec.m:
        raise InvalidArgument(f"horizontal index must lie in 1..{spec.m}, got {i}")
    x = _as_points(spec, x)
    t = np.asarray(t, dtype=np.float64)
    e = np.zeros(np.broadcast_shapes(x.shape[:-1], t.shape) + (spec.n,))
    e[..., i - 1] = t
    return mul(spec, x, e)


def horizontal_point(spec: GroupSpec, u) -> np.ndarray:
    """exp of a horizontal vector: (u_1..u_m, 0, ..., 0)."""
    u = np.asarray(u, dtype=np.float64)
    out = np.zeros(u.shape[:-1] + (spec.n,))
    out[..., :spec.m] = u
    return out


@dataclass(frozen=True)
class GroupLinearMap:
    """h -> <v, p(h)>."""

    v: tuple[float, ...]

    def __call__(self, spec: GroupSpec, h) -> np.ndarray:
        v = np.asarray(self.v, dtype=np.float64)
        if v.shape != (spec.m,):
            raise InvalidArgument("GroupLinearMap vector must have length m")
        return project_horizontal(spec, h) @ v


def puc_tau(spec: GroupSpec, t: float, target, tol: float = 1e-12) -> np.ndarray:
    """Tail ``tau`` with ``(t, tau)^{-1} target = (x_1 - t, 0, ..., 0)``.

    Built coordinate by coordinate: tau_i = y_i + R_i((t,tau)^{-1}, target),
    which only depends on already-computed entries because R_i involves lower
    indices only.  Requires the first coordinate to be horizontal.
    """
    target = _as_points(spec, target)
    if target.ndim != 1:
        raise InvalidArgument("puc_tau expects a single target point")
    if spec.n < 2:
        raise InvalidArgument("need n >= 2 to split off a tail")
    point = np.empty(spec.n)
    point[0] = t
    for i in range(1, spec.n):
        point[i] = target[i]
        if spec.law[i]:
            # R_i only reads point[:i] so the unfilled tail is irrelevant
            neg = -point
            r = 0.0
            for mo in spec.law[i]:
                term = mo.coef
                for k in mo.p_idx:
                    term *= neg[k]
                for k in mo.q_idx:
                    term *= target[k]
                r += term
            point[i] = target[i] + r
    reduced = mul(spec, inv(spec, point), target)
    expect = np.zeros(spec.n)
    expect[0] = target[0] - t
    scale = max(1.0, float(np.abs(target).max()), abs(t))
    if np.abs(reduced - expect).max() > tol * scale ** spec.step:
        raise InternalError(f"tau construction failed, reduced point {reduced}")
    return point[1:]


_H1_LAW = heisenberg_spec().law
