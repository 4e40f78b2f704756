"""Hot numeric kernels with a numba path and a pure-numpy path.

The public names at the bottom of the module are bound to one of the two
implementations according to :data:`porous_carnot._accel.USE_NUMBA`.  Both
implementations are always importable so the test-suite and the benchmark can
compare them directly.
"""
from __future__ import annotations

import math

import numpy as np

from ._accel import USE_NUMBA, njit

# absolute slack (in envelope-relative units) removed from certified gaps
GAP_SLACK = 1e-13


# ---------------------------------------------------------------------------
# Heisenberg group H^1


def heis_mul_np(p, q):
    out = np.empty(np.broadcast_shapes(p.shape, q.shape), dtype=np.result_type(p, q))
    out[..., 0] = p[..., 0] + q[..., 0]
    out[..., 1] = p[..., 1] + q[..., 1]
    out[..., 2] = p[..., 2] + q[..., 2] - 2.0 * (p[..., 0] * q[..., 1] - p[..., 1] * q[..., 0])
    return out


def koranyi_dist_np(a, b):
    dx = b[..., 0] - a[..., 0]
    dy = b[..., 1] - a[..., 1]
    dt = b[..., 2] - a[..., 2] + 2.0 * (a[..., 0] * b[..., 1] - a[..., 1] * b[..., 0])
    rr = dx * dx + dy * dy
    return np.sqrt(np.sqrt(rr * rr + dt * dt))


@njit
def _koranyi_dist_nb(a, b, out):
    for i in range(out.shape[0]):
        dx = b[i, 0] - a[i, 0]
        dy = b[i, 1] - a[i, 1]
        dt = b[i, 2] - a[i, 2] + 2.0 * (a[i, 0] * b[i, 1] - a[i, 1] * b[i, 0])
        rr = dx * dx + dy * dy
        out[i] = math.sqrt(math.sqrt(rr * rr + dt * dt))
    return out


def koranyi_dist_nb(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    shape = np.broadcast_shapes(a.shape, b.shape)
    a2 = np.ascontiguousarray(np.broadcast_to(a, shape).reshape(-1, 3))
    b2 = np.ascontiguousarray(np.broadcast_to(b, shape).reshape(-1, 3))
    out = np.empty(a2.shape[0])
    _koranyi_dist_nb(a2, b2, out)
    return out.reshape(shape[:-1])


# ---------------------------------------------------------------------------
# Distance from a radius to the Cantor ladder {0} U (union of A_{n,k})


def cantor_gap_np(u, depth=60):
    """Distance from ``u`` (array, values in [0, 1]) to the middle-third Cantor set."""
    u = np.array(u, dtype=np.float64, copy=True)
    out = np.zeros_like(u)
    scale = np.ones_like(u)
    live = (u > 0.0) & (u < 1.0)
    for _ in range(depth):
        if not live.any():
            break
        u3 = 3.0 * u
        d = np.floor(u3)
        mid = live & (d == 1.0)
        out[mid] = scale[mid] * np.minimum(u[mid] - 1.0 / 3.0, 2.0 / 3.0 - u[mid])
        live &= ~mid
        live &= u3 < 3.0
        u = np.where(live, u3 - d, u)
        scale = np.where(live, scale / 3.0, scale)
    return np.maximum(out, 0.0)


def ladder_gap_np(r, depth=60):
    """Certified lower bound on dist(r, {0} U A) for r >= 0 (array)."""
    r = np.asarray(r, dtype=np.float64)
    out = np.zeros_like(r)
    big = r >= 1.0
    out[big] = r[big] - 1.0
    inner = (r > 0.0) & (r < 1.0)
    if inner.any():
        ri = r[inner]
        _, e = np.frexp(ri)
        n = 1 - e
        deep = n > 500
        n = np.where(deep, 1, n)
        base = np.ldexp(1.0, -n)
        env = np.ldexp(1.0, -2 * n)
        pos = (ri - base) / env
        k = np.floor(pos)
        u = pos - k
        g = cantor_gap_np(u, depth)
        g = np.maximum(g - GAP_SLACK, 0.0) * env
        g = np.where(deep, 0.0, np.minimum(g, ri))
        out[inner] = g
    return out


@njit
def _cantor_gap_scalar(u, depth):
    if u <= 0.0 or u >= 1.0:
        return 0.0
    scale = 1.0
    for _ in range(depth):
        u3 = 3.0 * u
        if u3 >= 3.0:
            return 0.0
        d = math.floor(u3)
        if d == 1.0:
            g = min(u - 1.0 / 3.0, 2.0 / 3.0 - u)
            return max(g, 0.0) * scale
        u = u3 - d
        scale /= 3.0
    return 0.0


@njit
def _ladder_gap_nb(r, depth, out):
    for i in range(r.shape[0]):
        ri = r[i]
        if ri >= 1.0:
            out[i] = ri - 1.0
            continue
        if ri <= 0.0:
            out[i] = 0.0
            continue
        base = 0.5
        n = 1
        while ri < base and n <= 500:
            base *= 0.5
            n += 1
        if n > 500:
            out[i] = 0.0
            continue
        env = base * base
        pos = (ri - base) / env
        k = math.floor(pos)
        u = pos - k
        g = _cantor_gap_scalar(u, depth)
        g = max(g - GAP_SLACK, 0.0) * env
        out[i] = min(g, ri)
    return out


def ladder_gap_nb(r, depth=60):
    r = np.asarray(r, dtype=np.float64)
    flat = np.ascontiguousarray(r.reshape(-1))
    out = np.empty_like(flat)
    _ladder_gap_nb(flat, depth, out)
    return out.reshape(r.shape)


def cantor_gap_nb(u, depth=60):
    u = np.asarray(u, dtype=np.float64)
    flat = u.reshape(-1)
    out = _cantor_gap_vec(np.ascontiguousarray(flat), depth)
    return out.reshape(u.shape)


@njit
def _cantor_gap_vec(u, depth):
    out = np.empty_like(u)
    for i in range(u.shape[0]):
        out[i] = _cantor_gap_scalar(u[i], depth)
    return out


# ---------------------------------------------------------------------------
# Gap from points to a family of balls: min_j d(x, c_j) - r_j
# metric code: 0 euclidean, 1 koranyi (H^1 only)


@njit
def _pair_dist(code, a, b):
    if code == 1:
        dx = b[0] - a[0]
        dy = b[1] - a[1]
        dt = b[2] - a[2] + 2.0 * (a[0] * b[1] - a[1] * b[0])
        rr = dx * dx + dy * dy
        return math.sqrt(math.sqrt(rr * rr + dt * dt))
    s = 0.0
    for j in range(a.shape[0]):
        s += (a[j] - b[j]) ** 2
    return math.sqrt(s)


@njit
def _ball_gap_nb(code, pts, centers, radii, lo0, lo1, g, nx, ny, cstart, order, rmax, arg):
    # uniform grid on the first two coordinates; every metric used here
    # dominates the max-norm of those coordinates, so cells at ring k are at
    # distance >= (k - 1) g and the ring search can stop early
    out = np.empty(pts.shape[0])
    two = centers.shape[1] > 1
    for i in range(pts.shape[0]):
        best = np.inf
        bi = -1
        cx = int(math.floor((pts[i, 0] - lo0) / g))
        cx = min(max(cx, 0), nx - 1)
        cy = 0
        if two:
            cy = int(math.floor((pts[i, 1] - lo1) / g))
            cy = min(max(cy, 0), ny - 1)
        kmax = max(nx, ny)
        visited = 0
        brute = False
        for k in range(kmax + 1):
            if (k - 1) * g - rmax >= best:
                break
            visited += 8 * k + 1
            if visited > centers.shape[0]:
                brute = True
                break
            # walk the perimeter of the ring only
            for ix in range(cx - k, cx + k + 1):
                if ix < 0 or ix >= nx:
                    continue
                edge = ix == cx - k or ix == cx + k
                step = 1 if edge else 2 * k
                iy = cy - k
                while iy <= cy + k:
                    if 0 <= iy < ny:
                        cell = ix * ny + iy
                        for a in range(cstart[cell], cstart[cell + 1]):
                            c = order[a]
                            d = _pair_dist(code, pts[i], centers[c]) - radii[c]
                            if d < best:
                                best = d
                                bi = c
                    if step == 0:
                        break
                    iy += step
        if brute:
            for c in range(centers.shape[0]):
                d = _pair_dist(code, pts[i], centers[c]) - radii[c]
                if d < best:
                    best = d
                    bi = c
        out[i] = best
        arg[i] = bi
    return out


def ball_nearest_np(code, pts, centers, radii):
    """min_j d(x, c_j) - r_j and the minimising j (-1 when there are no balls)."""
    pts = np.asarray(pts, dtype=np.float64)
    out = np.full(pts.shape[0], np.inf)
    arg = np.full(pts.shape[0], -1, dtype=np.int64)
    if centers.shape[0] == 0:
        return out, arg
    step = max(1, 4_000_000 // max(1, centers.shape[0]))
    for s in range(0, pts.shape[0], step):
        p = pts[s:s + step, None, :]
        c = centers[None, :, :]
        if code == 1:
            d = koranyi_dist_np(p, c)
        else:
            d = np.sqrt(((p - c) ** 2).sum(-1))
        g = d - radii[None, :]
        arg[s:s + step] = g.argmin(axis=1)
        out[s:s + step] = g.min(axis=1)
    return out, arg


def ball_gap_np(code, pts, centers, radii):
    return ball_nearest_np(code, pts, centers, radii)[0]


class BallIndex:
    """Immutable bucket grid over ball centers for repeated nearest-ball queries."""

    def __init__(self, code, centers, radii, numba=None):
        self.code = int(code)
        self.centers = np.ascontiguousarray(centers, dtype=np.float64)
        self.radii = np.ascontiguousarray(radii, dtype=np.float64)
        self.numba = USE_NUMBA if numba is None else numba
        if self.numba and len(self.radii):
            self._build()

    def _build(self):
        c, r = self.centers, self.radii
        two = c.shape[1] > 1
        lo0, hi0 = c[:, 0].min(), c[:, 0].max()
        lo1, hi1 = (c[:, 1].min(), c[:, 1].max()) if two else (0.0, 0.0)
        span = max(hi0 - lo0, hi1 - lo1, 1e-300)
        # cells about twice the median radius, capped to keep the grid small
        g = max(2.0 * float(np.median(r)), span / (2048 if two else 1 << 20), 1e-300)
        nx = int((hi0 - lo0) / g) + 1
        ny = int((hi1 - lo1) / g) + 1 if two else 1
        ix = np.minimum(((c[:, 0] - lo0) / g).astype(np.int64), nx - 1)
        iy = np.minimum(((c[:, 1] - lo1) / g).astype(np.int64), ny - 1) if two else np.zeros_like(ix)
        cell = ix * ny + iy
        order = np.argsort(cell, kind="stable")
        cstart = np.searchsorted(cell[order], np.arange(nx * ny + 1)).astype(np.int64)
        self._grid = (float(lo0), float(lo1), float(g), nx, ny, cstart, order, float(r.max()))

    def query(self, pts):
        pts = np.ascontiguousarray(pts, dtype=np.float64)
        if len(self.radii) == 0:
            return np.full(pts.shape[0], np.inf), np.full(pts.shape[0], -1, dtype=np.int64)
        if not self.numba:
            return ball_nearest_np(self.code, pts, self.centers, self.radii)
        arg = np.empty(pts.shape[0], dtype=np.int64)
        out = _ball_gap_nb(self.code, pts, self.centers, self.radii, *self._grid, arg)
        return out, arg


def ball_gap_nb(code, pts, centers, radii):
    return BallIndex(code, centers, radii, numba=True).query(pts)[0]


@njit
def _overlaps_nb(code, centers, radii, order, xs, rmax, limit):
    # returns up to `limit` index pairs (i, j) with d(c_i, c_j) <= r_i + r_j
    found = np.empty((limit, 2), dtype=np.int64)
    nf = 0
    n = centers.shape[0]
    for a in range(n):
        i = order[a]
        b = a + 1
        while b < n:
            if xs[b] - xs[a] > radii[i] + rmax:
                break
            j = order[b]
            if _pair_dist(code, centers[i], centers[j]) <= radii[i] + radii[j]:
                if nf < limit:
                    found[nf, 0] = i
                    found[nf, 1] = j
                nf += 1
            b += 1
    return found[:min(nf, limit)], nf


def overlaps(code, centers, radii, limit=100):
    """Pairs of closed balls that are not certified disjoint (d > r_i + r_j)."""
    centers = np.ascontiguousarray(centers, dtype=np.float64)
    radii = np.ascontiguousarray(radii, dtype=np.float64)
    if centers.shape[0] < 2:
        return np.empty((0, 2), dtype=np.int64), 0
    order = np.argsort(centers[:, 0], kind="stable")
    xs = np.ascontiguousarray(centers[order, 0])
    pairs, n = _overlaps_nb(code, centers, radii, order, xs, float(radii.max()), limit)
    return pairs, int(n)


if USE_NUMBA:
    koranyi_dist = koranyi_dist_nb
    ladder_gap = ladder_gap_nb
    cantor_gap = cantor_gap_nb
    ball_gap = ball_gap_nb
else:
    koranyi_dist = koranyi_dist_np
    ladder_gap = ladder_gap_np
    cantor_gap = cantor_gap_np
    ball_gap = ball_gap_np
heis_mul = heis_mul_np
