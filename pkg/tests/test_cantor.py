from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from porous_carnot.cantor import (LadderIndex, Membership, ank_envelope, ank_member, cantor_member,
                                  gap_window, gap_window_point)
from porous_carnot.errors import InvalidArgument


def test_cantor_examples():
    assert cantor_member(0.25) == Membership.IN
    assert cantor_member(0.5) == Membership.OUT
    assert cantor_member(0.0) == Membership.IN
    assert cantor_member(1.0) == Membership.IN
    assert cantor_member(Fraction(1, 3)) == Membership.IN
    assert cantor_member(Fraction(2, 3)) == Membership.IN
    assert cantor_member(1.5) == Membership.OUT
    assert cantor_member(-0.1) == Membership.OUT


def test_cantor_float_is_exact_binary():
    # 1/10 = 0.0022...(base 3) is in C, but the float 0.1 is a nearby dyadic
    # rational and is judged as that exact value
    assert cantor_member(Fraction(1, 10)) == Membership.IN
    assert cantor_member(0.1) == Membership.OUT
    assert cantor_member(Fraction(2, 3)) == Membership.IN
    assert cantor_member(2 / 3) == Membership.OUT
    assert cantor_member(Fraction(3, 4)) == Membership.IN


def test_envelope_examples():
    assert ank_envelope(LadderIndex(1, 0)) == (0.5, 0.75)
    assert ank_envelope(LadderIndex(1, 1)) == (0.75, 1.0)
    assert ank_envelope(LadderIndex(2, 3)) == (0.4375, 0.5)
    with pytest.raises(InvalidArgument):
        LadderIndex(1, 2)


def test_envelope_tiling_exact():
    for n in range(1, 11):
        ivs = [(LadderIndex(n, k).lo, LadderIndex(n, k).hi) for k in range(2 ** n)]
        assert ivs[0][0] == Fraction(1, 2 ** n)
        assert ivs[-1][1] == Fraction(1, 2 ** (n - 1))
        assert all(a[1] == b[0] for a, b in zip(ivs, ivs[1:]))


def test_ank_member_examples():
    assert ank_member(0.5) == (LadderIndex(1, 0), Membership.IN)
    assert ank_member(0.6)[0] is None
    assert ank_member(0.75) == (LadderIndex(1, 0), Membership.IN)
    assert ank_member(0.0) == (None, Membership.OUT)


def test_gap_window_examples():
    assert gap_window(0.5) == LadderIndex(1, 0)
    assert gap_window(0.3) == LadderIndex(2, 1)
    assert gap_window(0.9) == LadderIndex(1, 1)


@settings(max_examples=300, deadline=None)
@given(st.floats(0.001, 0.999))
def test_gap_window_witness(t):
    idx, x = gap_window_point(t)
    assert t <= x <= t + 4 * t * t
    assert idx.lo <= x <= idx.hi
    assert ank_member(x)[1] == Membership.IN
