"""Ready-made instances used by the acceptance suite and the command line."""
from __future__ import annotations

from dataclasses import dataclass
from itertools import product

import numpy as np

from .group import GroupSpec, euclidean_spec, heisenberg_spec
from .metrics import make_metric
from .nondiff import BumpSpec, ScalarField, bump_make, build_nonsubdiff
from .sets import IN, OUT, SetOracle, digit_cantor_oracle, cantor_oracle, point_set, shell_set
from .whitney import Domain, WhitneyCover, whitney_cover

# ---------------------------------------------------------------------------
# Whitney covers


def point_cover(C: float = 6.0):
    spec = euclidean_spec(1)
    E = point_set(spec, box=(np.array([-1.0]), np.array([1.0])))
    m = make_metric("euclidean", spec)
    cover = whitney_cover(E, m, C, Domain.box([-1.0], [1.0]), s0=0.25, s_min=1e-5)
    return E, cover


def cantor_cover(C: float = 6.0, depth: int = 40):
    spec = euclidean_spec(1)
    E = cantor_oracle(depth)
    m = make_metric("euclidean", spec)
    cover = whitney_cover(E, m, C, Domain.box([0.0], [1.0]), s0=0.25, s_min=1e-5)
    return E, cover


SHELL_ANCHOR = (0.67, 0.0, 0.0)
SHELL_HALF = (0.01, 0.005, 0.005 ** 2)


def shell_cover(C: float = 6.0, s_min: float = 5e-4):
    """Cover of a small window around a point of the A_{1,0} shell in H^1."""
    E = shell_set(1, 0)
    m = make_metric("koranyi", heisenberg_spec())
    dom = Domain(np.array(SHELL_ANCHOR), np.array(SHELL_HALF))
    cover = whitney_cover(E, m, C, dom, s0=0.004, s_min=s_min)
    return E, cover


def near_set_samples(E: SetOracle, cover: WhitneyCover, count: int, spread: float, seed: int = 0):
    """Domain points close to sampled members of E (members found by rejection)."""
    rng = np.random.default_rng(seed)
    dom, m = cover.domain, cover.metric
    found = []
    for _ in range(50):
        p = dom.sample(m, 20 * count, rng)
        found.append(p[E.contains(p) == IN])
        if sum(len(f) for f in found) >= count:
            break
    base = np.concatenate(found)[:count]
    if len(base) == 0:
        return base
    jitter = rng.uniform(-1, 1, base.shape) * spread ** np.asarray(m.spec.weights, dtype=np.float64)
    return dom.to_world(m, dom.to_local(m, base) + jitter)


# ---------------------------------------------------------------------------
# non-subdifferentiable function on a union of Cantor pieces


@dataclass
class PiecesScenario:
    f: ScalarField
    bump: BumpSpec
    pieces: list
    offsets: np.ndarray
    width: float
    C: float


def cantor_pieces(I: int = 8, C: float = 6.0) -> PiecesScenario:
    """f built from I disjoint base-4 Cantor sets (digits 0 and 3) in the line.

    Piece i lives in [(i-1)/8, (i-1)/8 + 1/16]; its cover uses the piece's
    one-sided window of width 1/64 and treats the window edge as an obstacle.
    """
    spec = euclidean_spec(1)
    m = make_metric("euclidean", spec)
    bump = bump_make(spec, metric=m)
    width = 1.0 / 16.0
    offsets = np.arange(I) / 8.0
    pieces = []
    for a in offsets:
        E = digit_cantor_oracle(4, (0, 3), offset=float(a), width=width)
        dom = Domain.box([a - 1.0 / 64.0], [a + width + 1.0 / 64.0])
        cover = whitney_cover(E, m, C, dom, s0=1.0 / 64.0, s_min=1e-6, domain_as_obstacle=True)
        pieces.append((E, cover, C))
    return PiecesScenario(build_nonsubdiff(pieces, bump), bump, pieces, offsets, width, C)


def piece_points(offset: float, width: float, count: int = 20, digits: int = 10, seed: int = 0):
    """Exact members of a base-4 {0,3} Cantor piece (finite expansions)."""
    rng = np.random.default_rng(seed)
    d = rng.choice([0, 3], size=(count, digits))
    u = (d * 4.0 ** -np.arange(1, digits + 1)).sum(1)
    return offset + width * u


# ---------------------------------------------------------------------------
# gradient-lab instances


@dataclass
class LemmaInstance:
    F: ScalarField
    E: SetOracle
    z: np.ndarray
    r: float
    rho: float
    theta: float
    h: ScalarField


def _generic_h(spec: GroupSpec, rng) -> ScalarField:
    a, b, c = rng.uniform(2.0, 8.0, 3)
    ph = rng.uniform(0, 2 * np.pi, 2)

    def fn(p):
        return np.sin(a * p[:, 0] + ph[0]) + np.cos(b * p[:, 1] + ph[1]) + 0.1 * np.sin(c * p[:, 2])

    # |X_1 h| <= a + 0.2 c |y|, |X_2 h| <= b + 0.2 c |x|; the box has |x|, |y| <= 1
    return ScalarField(fn, spec, lipschitz=float(np.hypot(a + 0.2 * c, b + 0.2 * c)))


def quadratic_instance(bump: BumpSpec, rng) -> LemmaInstance:
    """F = x^2/2 with E the slab |x| <= rho; the precondition forces a small ball."""
    spec = bump.spec
    rho = float(rng.uniform(0.3, 0.8))
    r = float(rng.uniform(0.3, 0.8)) * rho * bump.beta / 8.0
    zx_max = max(np.sqrt(rho * r * bump.beta / 8.0) * 0.95 - r, 0.0)
    z = np.array([rng.uniform(-zx_max, zx_max), rng.uniform(-0.5, 0.5), rng.uniform(-0.5, 0.5)])
    theta = (abs(z[0]) + r) ** 2 / 2.0
    F = ScalarField(lambda p: p[:, 0] ** 2 / 2.0, spec, lipschitz=1.0)
    E = SetOracle("slab", spec, lambda p: np.where(np.abs(p[..., 0]) <= rho, IN, OUT).astype(np.int8),
                  (-np.ones(3), np.ones(3)))
    return LemmaInstance(F, E, z, r, rho, theta, _generic_h(spec, rng))


def oscillating_instance(bump: BumpSpec, rng) -> LemmaInstance:
    """F = A sin(w x) with |grad F| = 2 rho |cos(w x)|, so E is a stack of thin slabs."""
    spec = bump.spec
    rho, r = 0.2, 0.1
    k = int(np.ceil(2.6 * 2.0 / bump.beta)) + 1  # 8 m theta < rho r v with theta = A
    w = 2 * np.pi * k / r
    A = 2 * rho / w
    z = rng.uniform(-0.3, 0.3, 3)
    F = ScalarField(lambda p: A * np.sin(w * p[:, 0]), spec, lipschitz=2 * rho)
    E = SetOracle("cos-slabs", spec,
                  lambda p: np.where(2 * rho * np.abs(np.cos(w * p[..., 0])) <= rho, IN, OUT).astype(np.int8),
                  (-np.ones(3), np.ones(3)))
    return LemmaInstance(F, E, z, r, rho, A, _generic_h(spec, rng))


def polynomial_family(spec: GroupSpec | None = None):
    """(f, analytic horizontal gradient) pairs on H^1."""
    spec = spec or heisenberg_spec()
    fam = []
    for i, j, k in product(range(3), range(3), range(2)):
        if i + j + k == 0:
            continue

        def fn(p, i=i, j=j, k=k):
            return p[:, 0] ** i * p[:, 1] ** j * p[:, 2] ** k

        def grad(p, i=i, j=j, k=k):
            x, y, t = p[:, 0], p[:, 1], p[:, 2]
            dx = i * x ** max(i - 1, 0) * y ** j * t ** k
            dy = j * x ** i * y ** max(j - 1, 0) * t ** k
            dt = k * x ** i * y ** j * t ** max(k - 1, 0)
            # X = d/dx + 2y d/dt, Y = d/dy - 2x d/dt
            return np.stack([dx + 2 * y * dt, dy - 2 * x * dt], -1)

        fam.append((f"x^{i} y^{j} t^{k}", ScalarField(fn, spec), grad))
    return fam


SLAB_G = ((0.2, -0.1), (0.4, 0.1))


def slab_function(spec: GroupSpec | None = None) -> ScalarField:
    spec = spec or heisenberg_spec()
    return ScalarField(lambda p: p[:, 0] ** 2 / 2.0, spec, lipschitz=1.0)


def cover_deltas(cover: WhitneyCover, levels: int = 16) -> list[float]:
    """Thresholds 2^-1..2^-8 plus a dyadic ladder below the largest radius."""
    top = float(cover.radii.max()) if len(cover) else 0.5
    return sorted({2.0 ** -j for j in range(1, 9)} | {top * 2.0 ** -j for j in range(levels)}, reverse=True)
