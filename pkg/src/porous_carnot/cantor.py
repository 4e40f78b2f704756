"""Middle-third Cantor set and the ladder of rescaled copies A_{n,k}.

    A_{n,k} = (2^-n + k 4^-n) + 4^-n C,   n >= 1, 0 <= k <= 2^n - 1

For fixed ``n`` the envelopes [2^-n + k 4^-n, 2^-n + (k+1) 4^-n] tile
[2^-n, 2^-(n-1)].  Membership is decided on the exact binary value of the
input (via :class:`fractions.Fraction`), so ``IN`` and ``OUT`` are
certificates; ``UNDECIDED`` means the scan ran out of digits.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from enum import IntEnum
from fractions import Fraction

from .errors import InternalError, InvalidArgument

DEFAULT_DEPTH = 40


class Membership(IntEnum):
    OUT = 0
    IN = 1
    UNDECIDED = 2


@dataclass(frozen=True, order=True)
class LadderIndex:
    n: int
    k: int

    def __post_init__(self):
        if self.n < 1 or not 0 <= self.k <= 2 ** self.n - 1:
            raise InvalidArgument(f"invalid ladder index (n={self.n}, k={self.k})")

    @property
    def lo(self) -> Fraction:
        return Fraction(1, 2 ** self.n) + Fraction(self.k, 4 ** self.n)

    @property
    def length(self) -> Fraction:
        return Fraction(1, 4 ** self.n)

    @property
    def hi(self) -> Fraction:
        return self.lo + self.length


def ank_envelope(idx: LadderIndex) -> tuple[float, float]:
    return float(idx.lo), float(idx.hi)


def _frac(x) -> Fraction:
    if isinstance(x, Fraction):
        return x
    if isinstance(x, float) and not math.isfinite(x):
        raise InvalidArgument("non-finite input")
    return Fraction(x)


def cantor_member(x, depth: int = DEFAULT_DEPTH) -> Membership:
    """Three-valued membership in the middle-third Cantor set.

    Ternary digits of the exact value are scanned; a digit 1 with a nonzero
    tail certifies OUT, a terminating or repeating expansion without a 1
    certifies IN.
    """
    if depth < 1:
        raise InvalidArgument("depth must be >= 1")
    x = _frac(x)
    if x < 0 or x > 1:
        return Membership.OUT
    if x == 0 or x == 1:
        return Membership.IN
    r, den = x.numerator, x.denominator
    seen = {r}
    for _ in range(depth):
        r *= 3
        d, r = divmod(r, den)
        if d == 1:
            return Membership.IN if r == 0 else Membership.OUT
        if r == 0 or r in seen:
            return Membership.IN
        seen.add(r)
    return Membership.UNDECIDED


def cantor_next(u, depth: int = DEFAULT_DEPTH) -> Fraction | None:
    """A point of C that is >= u and within 3^-depth of the smallest such point."""
    u = _frac(u)
    if u > 1:
        return None
    if u <= 0:
        return Fraction(0)
    prefix = Fraction(0)
    scale = Fraction(1)
    r = u
    for _ in range(depth):
        r *= 3
        d = math.floor(r)
        r -= d
        scale /= 3
        if d == 1:
            if r == 0:
                return prefix + scale
            return prefix + 2 * scale
        if d == 3:
            return prefix + 3 * scale
        prefix += d * scale
        if r == 0:
            return prefix
    return prefix + scale


def _level(x: Fraction) -> int:
    # n with 2^-n <= x < 2^-(n-1), for 0 < x < 1
    n = 1
    while x < Fraction(1, 2 ** n):
        n += 1
    return n


def _candidates(x: Fraction) -> list[LadderIndex]:
    if x == 1:
        return [LadderIndex(1, 1)]
    n = _level(x)
    pos = (x - Fraction(1, 2 ** n)) * 4 ** n
    k = math.floor(pos)
    out = [LadderIndex(n, k)]
    if pos == k:
        if k >= 1:
            out.append(LadderIndex(n, k - 1))
        else:
            out.append(LadderIndex(n + 1, 2 ** (n + 1) - 1))
    return sorted(out)


def ank_member(x, depth: int = DEFAULT_DEPTH) -> tuple[LadderIndex | None, Membership]:
    """Index of a ladder set containing ``x`` (smallest (n, k) on ties)."""
    x = _frac(x)
    if x <= 0 or x > 1:
        return None, Membership.OUT
    undecided = False
    for idx in _candidates(x):
        status = cantor_member((x - idx.lo) * 4 ** idx.n, depth)
        if status == Membership.IN:
            return idx, Membership.IN
        undecided |= status == Membership.UNDECIDED
    return None, (Membership.UNDECIDED if undecided else Membership.OUT)


def gap_window_point(t, depth: int = DEFAULT_DEPTH) -> tuple[LadderIndex, Fraction]:
    """Ladder index meeting [t, t + 4t^2] together with a witness point.

    The witness is the first envelope endpoint >= t; endpoints belong to the
    adjacent ladder sets and the envelope length 4^-n never exceeds t^2.
    """
    t = _frac(t)
    if not 0 < t < 1:
        raise InvalidArgument(f"t must lie in (0, 1), got {t}")
    hi = t + 4 * t * t
    n = _level(t)
    k = math.ceil((t - Fraction(1, 2 ** n)) * 4 ** n)
    e = Fraction(1, 2 ** n) + Fraction(k, 4 ** n)
    if k < 2 ** n:
        idx = LadderIndex(n, k)
    elif n >= 2:
        idx = LadderIndex(n - 1, 0)
    else:
        idx = LadderIndex(n, 2 ** n - 1)
    if e <= hi:
        return idx, e
    # not reachable for 0 < t < 1; kept as a certified search over nearby levels
    for m in (n - 1, n, n + 1):
        if m < 1:
            continue
        for kk in range(2 ** m):
            cand = LadderIndex(m, kk)
            if cand.hi < t or cand.lo > hi:
                continue
            c = cantor_next(max(Fraction(0), (t - cand.lo) * 4 ** m), depth)
            if c is not None and c <= 1:
                w = cand.lo + c * cand.length
                if t <= w <= hi:
                    return cand, w
    raise InternalError(f"no ladder set meets [{t}, {hi}]")


def gap_window(t, depth: int = DEFAULT_DEPTH) -> LadderIndex:
    return gap_window_point(t, depth)[0]
