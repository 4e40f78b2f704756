"""Greedy multiscale covers by disjoint balls avoiding a porous set.

The construction works on a box of the group given in left-translated
coordinates around an anchor point (plain translation for the euclidean
metric).  Boxes are refined dyadically; at scale ``s`` every live cell whose
center is at certified distance >= s/2 from the set and from the balls chosen
so far may receive a ball of radius ``min(kappa * free, s)``.

A verified cover certifies: pairwise disjoint closed balls, balls missing the
set, and for every threshold delta on a declared ladder, that each sample of
the domain lies in a ball or in some ``C``-inflated ball of radius < delta.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field

import numpy as np

from . import kernels
from .errors import ConstructionFailed, InvalidArgument, UnsupportedMetric
from .group import mul
from .metrics import Metric
from .sets import OUT, SetOracle

log = logging.getLogger(__name__)

TRUNCATION_LEVELS = 8  # 2^3: three dyadic levels above the construction floor

_CODES = {"euclidean": 0, "koranyi": 1}


def _code(metric: Metric) -> int:
    if metric.kind not in _CODES:
        raise UnsupportedMetric(f"covers are built for euclidean or koranyi distances, not {metric.name}")
    return _CODES[metric.kind]


@dataclass(frozen=True)
class Domain:
    """The set {anchor * h : |h_i| <= half_i} (anchor + h for euclidean)."""

    anchor: np.ndarray
    half: np.ndarray

    @classmethod
    def box(cls, lo, hi) -> "Domain":
        lo = np.asarray(lo, dtype=np.float64)
        hi = np.asarray(hi, dtype=np.float64)
        if lo.shape != hi.shape or np.any(hi <= lo):
            raise InvalidArgument("domain box needs lo < hi")
        return cls((lo + hi) / 2.0, (hi - lo) / 2.0)

    def to_world(self, metric: Metric, h):
        if metric.kind == "euclidean":
            return self.anchor + h
        return mul(metric.spec, self.anchor, h)

    def to_local(self, metric: Metric, p):
        if metric.kind == "euclidean":
            return p - self.anchor
        return mul(metric.spec, -self.anchor, p)

    def contains(self, metric: Metric, p) -> np.ndarray:
        return np.all(np.abs(self.to_local(metric, p)) <= self.half * (1 + 1e-12), axis=-1)

    def sample(self, metric: Metric, count: int, rng) -> np.ndarray:
        h = rng.uniform(-1.0, 1.0, (count, len(self.half))) * self.half
        return self.to_world(metric, h)

    def boundary_lower(self, metric: Metric, p) -> np.ndarray:
        """Lower bound on the distance from p to the complement of the domain."""
        h = self.to_local(metric, p)
        room = self.half - np.abs(h)
        if metric.kind == "euclidean":
            return np.maximum(room.min(-1), 0.0)
        # koranyi: horizontal faces by projection; vertical faces need
        # d^2 + 2|h_xy| d >= room_t
        rh = np.hypot(h[..., 0], h[..., 1])
        rt = np.maximum(room[..., 2], 0.0)
        dt = rt / (rh + np.sqrt(rh * rh + rt))
        return np.maximum(np.minimum(np.minimum(room[..., 0], room[..., 1]), dt), 0.0)


@dataclass
class WhitneyCover:
    centers: np.ndarray
    radii: np.ndarray
    C: float
    domain: Domain
    metric: Metric
    stats: dict = field(default_factory=dict)

    def __len__(self):
        return len(self.radii)


def _cell_radius(metric: Metric, hc: np.ndarray, hs: np.ndarray) -> np.ndarray:
    """Upper bound on the distance from a cell center to any point of the cell."""
    if metric.kind == "euclidean":
        return np.full(hc.shape[0], float(np.sqrt((hs ** 2).sum())))
    a, b = hs[0], hs[2]
    twist = 2.0 * (np.abs(hc[:, 0]) + np.abs(hc[:, 1])) * a
    return ((2.0 * a * a) ** 2 + (b + twist) ** 2) ** 0.25


def _children(hc: np.ndarray, hs: np.ndarray, weights: np.ndarray):
    # split coordinate i into 2^{w_i} parts so cells keep their dilation shape
    parts = (2 ** weights).astype(int)
    new_hs = hs / parts
    offs = [(-1.0 + (2 * np.arange(p) + 1) / p) * h for p, h in zip(parts, hs)]
    grid = np.stack(np.meshgrid(*offs, indexing="ij"), -1).reshape(-1, len(hs))
    return (hc[:, None, :] + grid[None, :, :]).reshape(-1, len(hs)), new_hs


def _initial_cells(domain: Domain, hs: np.ndarray):
    counts = np.maximum(np.ceil(domain.half / hs - 1e-9).astype(int), 1)
    hs = domain.half / counts
    axes = [(-1.0 + (2 * np.arange(c) + 1) / c) * h for c, h in zip(counts, domain.half)]
    return np.stack(np.meshgrid(*axes, indexing="ij"), -1).reshape(-1, len(hs)), hs


class _Accepted:
    """Balls accepted at the current scale, bucketed on horizontal coordinates."""

    def __init__(self, metric: Metric, size: float):
        self.metric, self.size = metric, size
        self.dims = min(2, metric.spec.m)
        self.buckets: dict[tuple, list[int]] = {}
        self.centers: list[np.ndarray] = []
        self.radii: list[float] = []

    def _key(self, p):
        return tuple(int(math.floor(v / self.size)) for v in p[:self.dims])

    def gap(self, p) -> float:
        key = self._key(p)
        idx = []
        for off in np.ndindex(*(3,) * self.dims):
            idx.extend(self.buckets.get(tuple(k + o - 1 for k, o in zip(key, off)), ()))
        if not idx:
            return math.inf
        c = np.array([self.centers[i] for i in idx])
        r = np.array([self.radii[i] for i in idx])
        return float((self.metric.dist(p, c) - r).min())

    def add(self, p, r):
        self.buckets.setdefault(self._key(p), []).append(len(self.radii))
        self.centers.append(p)
        self.radii.append(r)


def whitney_cover(E: SetOracle, metric: Metric, C: float, domain: Domain, s0: float = 0.25,
                  s_min: float = 1e-4, kappa: float = 0.9, budget: int = 200_000,
                  max_cells: int = 3_000_000, domain_as_obstacle: bool = False) -> WhitneyCover:
    """Greedy multiscale cover of ``domain`` minus ``E``; see the module docstring."""
    code = _code(metric)
    if not C > 1:
        raise InvalidArgument("inflation constant must exceed 1")
    if not 0 < s_min <= s0 < 1:
        raise InvalidArgument("need 0 < s_min <= s0 < 1")
    if not 0 < kappa < 1:
        raise InvalidArgument("kappa must lie in (0, 1)")
    if E.dist_lower(domain.anchor, metric) is None:
        raise InvalidArgument(f"set {E.name!r} has no distance bound for {metric.name}")
    w = np.asarray(metric.spec.weights, dtype=np.float64)
    # a set missing a ball around the whole domain needs only that ball
    whole = float(_cell_radius(metric, np.zeros((1, len(w))), domain.half)[0])
    if whole < 1.0 and E.dist_lower(domain.anchor, metric) > whole:
        return WhitneyCover(domain.anchor[None, :].copy(), np.array([whole]), float(C), domain, metric,
                            {"levels": 0, "balls": 1, "stopped": "single", "min_radius": whole})
    hc, hs = _initial_cells(domain, (s0 / 4.0) ** w)
    centers = np.empty((0, metric.spec.n))
    radii = np.empty(0)
    s = s0
    level = 0
    stopped = "scale"
    s_floor = s0
    while s >= s_min:
        world = domain.to_world(metric, hc)
        gap_old = kernels.ball_gap(code, world, centers, radii)
        live = gap_old > -_cell_radius(metric, hc, hs)
        hc, world, gap_old = hc[live], world[live], gap_old[live]
        free = np.minimum(E.dist_lower(world, metric), gap_old)
        if domain_as_obstacle:
            free = np.minimum(free, domain.boundary_lower(metric, world))
        inside = np.all(np.abs(hc) <= domain.half, axis=-1)
        cand = np.flatnonzero(inside & (kappa * free >= s / 2.0))
        cand = cand[np.argsort(-free[cand], kind="stable")]
        acc = _Accepted(metric, 2.5 * s)
        for i in cand:
            f = min(free[i], acc.gap(world[i]))
            r = min(kappa * f, s)
            if r >= s / 2.0:
                acc.add(world[i], r)
                if len(radii) + len(acc.radii) >= budget:
                    break
        s_floor = s
        if acc.radii:
            centers = np.vstack([centers, np.array(acc.centers)])
            radii = np.concatenate([radii, np.array(acc.radii)])
        log.debug("level %d scale %.3g: %d cells, %d new balls", level, s, len(hc), len(acc.radii))
        if len(radii) >= budget:
            stopped = "budget"
            break
        # drop cells now inside a ball, refine the rest
        gap_new = kernels.ball_gap(code, world, np.array(acc.centers).reshape(-1, metric.spec.n),
                                   np.array(acc.radii))
        keep = gap_new > -_cell_radius(metric, hc, hs)
        hc = hc[keep]
        s /= 2.0
        level += 1
        if s < s_min:
            break
        if len(hc) * 2 ** int(w.sum()) > max_cells:
            stopped = "cells"
            break
        hc, hs = _children(hc, hs, w)
    stats = {"levels": level, "balls": len(radii), "stopped": stopped,
             "s_min": s_min, "s_floor": s_floor, "kappa": kappa, "obstacle": domain_as_obstacle,
             "min_radius": float(radii.min()) if len(radii) else None}
    return WhitneyCover(centers, radii, float(C), domain, metric, stats)


# ---------------------------------------------------------------------------
# verification


@dataclass
class CoverReport:
    disjoint: bool
    overlap_pairs: np.ndarray
    avoids_E: bool
    uncertified_balls: int
    sampled_hits: int
    coverage: dict
    passed: bool
    worst: dict = field(default_factory=dict)


def cover_verify(cover: WhitneyCover, E: SetOracle, deltas, samples=None, n_random: int = 100_000,
                 per_ball: int = 16, seed: int = 0) -> CoverReport:
    """Check disjointness, avoidance of E and C-inflated coverage for each delta.

    ``samples`` adds caller-chosen domain points (e.g. a grid or points near E)
    to ``n_random`` uniform domain samples.  Thresholds at or below
    ``TRUNCATION_LEVELS`` times the last processed scale are reported with
    ``truncated=True`` and do not count towards ``passed``: the infinite cover
    would place balls below that scale, a finite one cannot.
    """
    metric = cover.metric
    code = _code(metric)
    rng = np.random.default_rng(seed)
    c, r = cover.centers, cover.radii
    pairs, n_over = kernels.overlaps(code, c, r)
    disjoint = n_over == 0

    if len(r):
        lower = E.dist_lower(c, metric)
        uncert = int(np.count_nonzero(~(lower > r))) if lower is not None else len(r)
        hits = 0
        for start in range(0, len(r), 4096):
            cc, rr = c[start:start + 4096], r[start:start + 4096]
            pts = np.concatenate([metric.sample_ball(ci, ri, per_ball, rng) for ci, ri in zip(cc, rr)])
            hits += int(np.count_nonzero(E.contains(pts) != OUT))
    else:
        uncert, hits = 0, 0
    avoids = uncert == 0 and hits == 0

    pts = [cover.domain.sample(metric, n_random, rng)] if n_random else []
    if samples is not None:
        extra = np.asarray(samples, dtype=np.float64).reshape(-1, metric.spec.n)
        pts.append(extra[cover.domain.contains(metric, extra)])
    pts = np.concatenate(pts) if pts else np.empty((0, metric.spec.n))
    in_E = E.contains(pts) != OUT
    gap_all = kernels.ball_gap(code, pts, c, r)
    in_B = gap_all <= 0.0
    rmin = float(r.min()) if len(r) else math.inf
    # a finite cover stops at its last processed scale; the gaps it leaves
    # there need balls a few dyadic levels smaller than anything it built
    floor = TRUNCATION_LEVELS * cover.stats.get("s_floor", rmin)

    coverage = {}
    worst = {}
    ok = True
    for d in deltas:
        d = float(d)
        small = r < d
        if small.any():
            g = kernels.ball_gap(code, pts, c[small], cover.C * r[small])
            covered = in_B | (g <= 0.0)
        else:
            g = np.full(len(pts), np.inf)
            covered = in_B.copy()
        truncated = d <= max(rmin, floor)
        bad = ~covered
        entry = {"samples": int(len(pts)), "uncovered": int(bad.sum()),
                 "uncovered_in_E": int((bad & in_E).sum()), "truncated": bool(truncated)}
        if bad.any():
            k = int(np.flatnonzero(bad)[np.argmax(g[bad])])
            worst[d] = {"point": pts[k].tolist(), "excess": float(g[k])}
        coverage[d] = entry
        if not truncated and bad.any():
            ok = False
    return CoverReport(disjoint, pairs, avoids, uncert, hits, coverage,
                       bool(disjoint and avoids and ok), worst)
