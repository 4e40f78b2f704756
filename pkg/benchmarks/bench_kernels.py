"""Time the numba kernels against their numpy fallbacks.

    python3 benchmarks/bench_kernels.py [--size N] [--repeat R]

Both variants are imported directly, so the POROUS_CARNOT_NUMPY flag is not
needed here; numba compile time is excluded by a warm-up call.
"""
from __future__ import annotations

import argparse
import timeit

import numpy as np

from porous_carnot import kernels


def cases(n: int, rng):
    a = rng.uniform(-1, 1, (n, 3))
    b = rng.uniform(-1, 1, (n, 3))
    r = rng.uniform(0.01, 1.0, n)
    u = rng.uniform(0, 1, n)
    nb = max(n // 20, 100)
    centers = rng.uniform(-1, 1, (nb, 3))
    radii = rng.uniform(0.001, 0.02, nb)
    return [
        ("koranyi_dist", lambda: kernels.koranyi_dist_np(a, b), lambda: kernels.koranyi_dist_nb(a, b)),
        ("ladder_gap", lambda: kernels.ladder_gap_np(r), lambda: kernels.ladder_gap_nb(r)),
        ("cantor_gap", lambda: kernels.cantor_gap_np(u), lambda: kernels.cantor_gap_nb(u)),
        ("ball_gap (koranyi)", lambda: kernels.ball_gap_np(1, a, centers, radii),
         lambda: kernels.ball_gap_nb(1, a, centers, radii)),
    ]


def main(argv=None) -> None:
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--size", type=int, default=100_000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    rng = np.random.default_rng(0)
    print(f"{'kernel':<22}{'numpy [ms]':>12}{'numba [ms]':>12}{'speedup':>10}  max |diff|")
    for name, f_np, f_nb in cases(args.size, rng):
        x_np, x_nb = np.asarray(f_np()), np.asarray(f_nb())  # warm-up and agreement
        diff = float(np.max(np.abs(x_np - x_nb)))
        t_np = min(timeit.repeat(f_np, number=1, repeat=args.repeat)) * 1e3
        t_nb = min(timeit.repeat(f_nb, number=1, repeat=args.repeat)) * 1e3
        print(f"{name:<22}{t_np:>12.2f}{t_nb:>12.2f}{t_np / t_nb:>10.1f}  {diff:.1e}")


if __name__ == "__main__":
    main()
