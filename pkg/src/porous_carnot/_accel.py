"""Numba switch.

Set ``POROUS_CARNOT_NUMPY=1`` to force the pure-numpy kernels; numba is also
skipped silently when it cannot be imported.
"""
from __future__ import annotations

import os

_FLAG = os.environ.get("POROUS_CARNOT_NUMPY", "").strip().lower()

try:
    import numba  # noqa: F401

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover
    HAVE_NUMBA = False

USE_NUMBA = HAVE_NUMBA and _FLAG not in ("1", "true", "yes", "on")


def njit(*args, **kwargs):
    """``numba.njit`` when available, identity decorator otherwise."""
    if HAVE_NUMBA:
        from numba import njit as _njit

        kwargs.setdefault("cache", True)
        return _njit(*args, **kwargs)
    if args and callable(args[0]):
        return args[0]
    return lambda f: f
