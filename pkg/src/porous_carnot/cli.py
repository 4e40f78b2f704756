"""Command line front end: ``porous-carnot <subcommand> [flags]``.

Exit codes: 0 success, 2 invalid arguments, 3 experiment invalid.
"""
from __future__ import annotations

import argparse
import json
import os
import sys
from pathlib import Path

import numpy as np

from .errors import ExperimentInvalid, InvalidArgument, UnsupportedMetric
from .group import heisenberg_spec
from .io import RunManifest, export_profile, write_csv, write_json
from .metrics import KINDS, CCSettings, cc_estimate, make_metric, snowflake
from .porosity import ScaleConfig, SearchConfig, classify, porosity_profile, recheck_witnesses
from .sets import IN, OUT, REGISTRY, UNDECIDED, get_set

COVER_SETS = ("point", "cantor", "shell")
QUOTIENT_FUNCTIONS = ("nonsubdiff", "koranyi-norm", "abs-x")
GRADIENT_SCENARIOS = ("derivatives", "quadratic", "oscillating", "slab", "linear")


def _registry_text() -> str:
    return (f"sets: {', '.join(REGISTRY)}\nmetrics: {', '.join(KINDS)}\n"
            f"cover sets: {', '.join(COVER_SETS)}\nquotient functions: {', '.join(QUOTIENT_FUNCTIONS)}\n"
            f"gradient scenarios: {', '.join(GRADIENT_SCENARIOS)}")


def _point(text: str | None, n: int) -> np.ndarray:
    if text is None:
        return np.zeros(n)
    try:
        p = np.array([float(v) for v in str(text).split(",")])
    except ValueError:
        raise InvalidArgument(f"cannot parse point {text!r}") from None
    if p.shape != (n,):
        raise InvalidArgument(f"point needs {n} coordinates, got {len(p)}")
    return p


def _metric(args, spec):
    if args.metric == "snowflake":
        return snowflake(make_metric("koranyi" if spec.n == 3 else "euclidean", spec), args.eps)
    if args.metric == "cc-estimate":
        raise UnsupportedMetric("cc-estimate is too slow for scans; use koranyi (Lipschitz equivalent)")
    return make_metric(args.metric, spec)


def _manifest(args) -> RunManifest:
    params = {k: v for k, v in vars(args).items() if k not in ("func", "config")}
    return RunManifest.create(args.command, params, args.seed)


# ---------------------------------------------------------------------------
# subcommands


def cmd_porosity_scan(args) -> int:
    E = get_set(args.set, args.depth)
    metric = _metric(args, E.spec)
    a = _point(args.point, E.spec.n)
    scales = ScaleConfig(args.r0, args.q, args.scales)
    search = SearchConfig(effort=args.effort, samples=args.samples, seed=args.seed, threads=args.threads)
    prof = porosity_profile(E, metric, a, scales, search)
    verdict, lam = classify(prof, args.lam_min, args.r_cut)
    man = _manifest(args)
    csv_p, _ = export_profile(prof, args.out, man, verdict=verdict)
    hits = recheck_witnesses(prof, E, metric, samples=200, seed=args.seed + 1)
    print(f"set={E.name} metric={metric.name} point={a.tolist()} mode={prof.mode}")
    for s, v in zip(prof.scales, prof.lambda_hat):
        print(f"  r={s:.6g}  lambda_hat={v:.6f}")
    print(f"verdict: {verdict}" + (f" (lambda >= {lam:.4f})" if lam is not None else ""))
    print(f"witness re-check hits: {hits}")
    print(f"wrote {csv_p}")
    return 0


def cmd_set_demo(args) -> int:
    E = get_set(args.set, args.depth)
    rng = np.random.default_rng(args.seed)
    lo, hi = E.box
    pts = rng.uniform(lo, hi, (args.samples or 2000, len(lo)))
    codes = E.contains(pts)
    counts = {name: int((codes == c).sum()) for name, c in (("in", IN), ("out", OUT), ("undecided", UNDECIDED))}
    rows = [list(p) + [int(c)] for p, c in zip(pts, codes)]
    n = len(lo)
    path = write_csv(Path(args.out) / "members.csv", [f"x{i + 1}" for i in range(n)] + ["code"], rows,
                     _manifest(args))
    print(f"set={E.name} box={lo.tolist()}..{hi.tolist()} samples={len(pts)} {counts}")
    print(f"wrote {path}")
    return 0


def _cover_scenario(name: str, C: float):
    from . import scenarios
    if name == "point":
        E, cover = scenarios.point_cover(C)
        samples = np.arange(-1.0, 1.0 + 5e-5, 1e-4)[:, None]
        return E, cover, samples, 0
    if name == "cantor":
        E, cover = scenarios.cantor_cover(C)
        samples = np.arange(0.0, 1.0 + 5e-5, 1e-4)[:, None]
        return E, cover, samples, 0
    if name == "shell":
        E, cover = scenarios.shell_cover(C)
        return E, cover, scenarios.near_set_samples(E, cover, 5000, 1e-4), 50_000
    raise InvalidArgument(f"unknown cover set {name!r}; known: {', '.join(COVER_SETS)}")


def cmd_cover_build(args) -> int:
    from .scenarios import cover_deltas
    from .whitney import cover_verify
    E, cover, samples, n_random = _cover_scenario(args.set, args.C)
    deltas = cover_deltas(cover)
    rep = cover_verify(cover, E, deltas, samples=samples, n_random=n_random, seed=args.seed)
    man = _manifest(args)
    n = cover.centers.shape[1]
    rows = [list(c) + [r] for c, r in zip(cover.centers, cover.radii)]
    path = write_csv(Path(args.out) / "cover.csv", [f"x{i + 1}" for i in range(n)] + ["radius"], rows, man)
    write_json(Path(args.out) / "cover_report.json",
               {"balls": len(cover), "C": cover.C, "disjoint": rep.disjoint, "avoids_E": rep.avoids_E,
                "coverage": rep.coverage, "passed": rep.passed, "stats": cover.stats}, man)
    print(f"set={E.name} balls={len(cover)} C={cover.C} disjoint={rep.disjoint} avoids_E={rep.avoids_E}")
    print(f"verification: {'PASS' if rep.passed else 'FAIL'}")
    print(f"wrote {path}")
    return 0


def _threshold_scales():
    return 1e-3 * 2.0 ** -np.arange(14)


def cmd_nondiff_build(args) -> int:
    from .nondiff import quotient_scan, sampled_lipschitz
    from .scenarios import cantor_pieces, piece_points
    sc = cantor_pieces(args.pieces, args.C)
    f, m = sc.f, sc.pieces[0][1].metric
    lip = sampled_lipschitz(f, f.spec, 20000, args.seed, metric=m, lo=-0.05, hi=1.0)
    man = _manifest(args)
    grid = np.arange(-1.0 / 64, 1.0, 1e-4)
    write_csv(Path(args.out) / "snapshot.csv", ["x", "f"], zip(grid, f(grid[:, None])), man)
    rows = []
    thr = 0.5 * sc.bump.beta / sc.C
    for i, a in enumerate(sc.offsets, 1):
        for x in piece_points(a, sc.width, args.points, seed=args.seed + i):
            q = quotient_scan(f, [x], m, _threshold_scales(), seed=args.seed)
            rows.append([i, x, float(q.max_quotient.max()), thr])
    path = write_csv(Path(args.out) / "quotients.csv", ["piece", "x", "max_quotient", "threshold"], rows, man)
    print(f"pieces={args.pieces} C={sc.C} beta={sc.bump.beta:.6f} sampled Lipschitz={lip:.6f}")
    for i in range(1, args.pieces + 1):
        qs = [r[2] for r in rows if r[0] == i]
        print(f"  piece {i}: min max-quotient {min(qs):.5f}  threshold {thr:.5f}  "
              f"{'ok' if min(qs) >= thr else 'below'}")
    print(f"wrote {path}")
    return 0


def cmd_quotient_scan(args) -> int:
    from .group import euclidean_spec
    from .nondiff import ScalarField, quotient_scan
    from .metrics import koranyi_norm
    if args.function == "nonsubdiff":
        from .scenarios import cantor_pieces
        sc = cantor_pieces(args.pieces, args.C)
        f, m = sc.f, sc.pieces[0][1].metric
    elif args.function == "koranyi-norm":
        spec = heisenberg_spec()
        f, m = ScalarField(koranyi_norm, spec, 1.0), make_metric("koranyi", spec)
    elif args.function == "abs-x":
        spec = euclidean_spec(1)
        f, m = ScalarField(lambda p: np.abs(p[:, 0]), spec, 1.0), make_metric("euclidean", spec)
    else:
        raise InvalidArgument(f"unknown function {args.function!r}; known: {', '.join(QUOTIENT_FUNCTIONS)}")
    x = _point(args.point, f.spec.n)
    scales = args.r0 * args.q ** np.arange(args.scales)
    q = quotient_scan(f, x, m, scales, seed=args.seed)
    n = f.spec.n
    rows = [[s, v] + list(h) for s, v, h in zip(q.scales, q.max_quotient, q.witness_h)]
    path = write_csv(Path(args.out) / "quotients.csv", ["scale", "max_quotient"] +
                     [f"witness_h{i + 1}" for i in range(n)], rows, _manifest(args))
    for s, v in zip(q.scales, q.max_quotient):
        print(f"  s={s:.6g}  max quotient={v:.6f}")
    print(f"wrote {path}")
    return 0


def cmd_gradient_demo(args) -> int:
    from . import gradient, scenarios
    from .nondiff import ScalarField, bump_make
    spec = heisenberg_spec()
    metric = make_metric("koranyi", spec)
    rng = np.random.default_rng(args.seed)
    man = _manifest(args)
    out = Path(args.out)
    if args.scenario == "derivatives":
        P = rng.uniform(-1, 1, (200, 3))
        rows = []
        for name, f, g in scenarios.polynomial_family(spec):
            err = float(np.abs(gradient.horizontal_gradient(f, P) - g(P)).max())
            rows.append([name, err])
            print(f"  {name}: max |FD - analytic| = {err:.3e}")
        write_csv(out / "derivatives.csv", ["function", "max_error"], rows, man)
    elif args.scenario in ("quadratic", "oscillating"):
        bump = bump_make(spec)
        make = scenarios.quadratic_instance if args.scenario == "quadratic" else scenarios.oscillating_instance
        rows = []
        for k in range(args.trials):
            ins = make(bump, rng)
            rep = gradient.usefullemma_experiment(ins.F, ins.E, ins.z, ins.r, ins.rho, ins.theta, bump,
                                                  ins.h, seed=args.seed + k)
            rows.append([k] + list(rep.x0) + [int(rep.in_E), rep.eta, rep.c, rep.H_x0, rep.H_boundary_min])
        write_csv(out / "lemma.csv", ["trial", "x1", "x2", "x3", "in_E", "eta", "c", "H_x0", "H_boundary_min"],
                  rows, man)
        print(f"in_E: {sum(r[4] for r in rows)}/{len(rows)}")
    elif args.scenario in ("slab", "linear"):
        if args.scenario == "slab":
            f = scenarios.slab_function(spec)
        else:
            f = ScalarField(lambda p: 0.3 * p[:, 0] + 0.1 * p[:, 1], spec, 1.0)
        lo, hi = scenarios.SLAB_G if args.scenario == "slab" else ((0.2, 0.0), (0.4, 0.2))
        rep = gradient.preimage_scan(f, lo, hi, (-np.ones(3), np.ones(3)), metric, seed=args.seed,
                                     max_points=args.points)
        rows = [list(p) + [v] for p, v in zip(rep.points, rep.verdicts)]
        write_csv(out / "preimage.csv", ["x1", "x2", "x3", "verdict"], rows, man)
        print(f"preimage points: {len(rows)} verdicts: {sorted(set(rep.verdicts))}")
    else:
        raise InvalidArgument(f"unknown scenario {args.scenario!r}; known: {', '.join(GRADIENT_SCENARIOS)}")
    return 0


def cmd_cc_bench(args) -> int:
    spec = heisenberg_spec()
    a = np.zeros(3)
    b = _point(args.point or "0,0,1", 3)
    cfg = CCSettings(segments=args.cc_segments, iters=args.cc_iters, penalty=args.cc_penalty, seed=args.seed)
    res = cc_estimate(spec, a, b, cfg)
    curve = res.curve(spec, a)
    K = res.controls.shape[0]
    rows = []
    for k in range(K + 1):
        u = res.controls[min(k, K - 1)]
        rows.append([k / K] + list(u) + list(curve[k]))
    man = _manifest(args)
    path = write_csv(Path(args.out) / "cc_curve.csv", ["t", "u1", "u2", "x1", "x2", "x3"], rows, man)
    write_json(Path(args.out) / "cc_result.json",
               {"value": res.value, "defect": res.defect, "converged": res.converged,
                "lengths_by_round": list(res.lengths_by_round), "target": b}, man)
    kor = float(make_metric("koranyi", spec).dist(a, b))
    print(f"cc_estimate={res.value:.6f} defect={res.defect:.2e} converged={res.converged} koranyi={kor:.6f}")
    if b[0] == 0 and b[1] == 0 and b[2] != 0:
        print(f"vertical target: sqrt(pi |t|) = {np.sqrt(np.pi * abs(b[2])):.6f}")
    print(f"wrote {path}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="porous-carnot", description="Porosity and differentiability experiments "
                                "in Carnot groups.", epilog=_registry_text(),
                                formatter_class=argparse.RawDescriptionHelpFormatter)
    sub = p.add_subparsers(dest="command")

    def common(sp, **defaults):
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--threads", type=int, default=os.cpu_count() or 1)
        sp.add_argument("--out", default="out")
        sp.add_argument("--config", help="JSON file with flag defaults (keys use underscores)")
        sp.add_argument("--point")
        sp.add_argument("--depth", type=int)
        sp.set_defaults(**defaults)

    sp = sub.add_parser("porosity-scan", help="porosity profile at a point")
    common(sp, func=cmd_porosity_scan)
    sp.add_argument("--set", default="pe")
    sp.add_argument("--metric", default="koranyi")
    sp.add_argument("--eps", type=float, default=0.5, help="snowflake exponent")
    sp.add_argument("--scales", type=int, default=20)
    sp.add_argument("--r0", type=float, default=0.5)
    sp.add_argument("--q", type=float, default=0.5)
    sp.add_argument("--effort", type=int, default=6)
    sp.add_argument("--samples", type=int, default=0, help="> 0 forces sampling mode")
    sp.add_argument("--lam-min", type=float, default=0.05)
    sp.add_argument("--r-cut", type=float, default=1e-3)

    sp = sub.add_parser("set-demo", help="sample a named set's membership oracle")
    common(sp, func=cmd_set_demo)
    sp.add_argument("--set", default="pe")
    sp.add_argument("--samples", type=int, default=2000)

    sp = sub.add_parser("cover-build", help="build and verify a Whitney-type cover")
    common(sp, func=cmd_cover_build)
    sp.add_argument("--set", default="cantor", help=f"one of {', '.join(COVER_SETS)}")
    sp.add_argument("--C", type=float, default=6.0)

    sp = sub.add_parser("nondiff-build", help="Lipschitz function on a union of Cantor pieces")
    common(sp, func=cmd_nondiff_build)
    sp.add_argument("--pieces", type=int, default=8)
    sp.add_argument("--C", type=float, default=6.0)
    sp.add_argument("--points", type=int, default=20)

    sp = sub.add_parser("quotient-scan", help="symmetric difference quotients at a point")
    common(sp, func=cmd_quotient_scan)
    sp.add_argument("--function", default="nonsubdiff")
    sp.add_argument("--pieces", type=int, default=8)
    sp.add_argument("--C", type=float, default=6.0)
    sp.add_argument("--scales", type=int, default=14)
    sp.add_argument("--r0", type=float, default=1e-3)
    sp.add_argument("--q", type=float, default=0.5)

    sp = sub.add_parser("gradient-demo", help="horizontal-gradient experiments")
    common(sp, func=cmd_gradient_demo)
    sp.add_argument("--scenario", default="derivatives")
    sp.add_argument("--trials", type=int, default=50)
    sp.add_argument("--points", type=int, default=20)

    sp = sub.add_parser("cc-bench", help="CC distance estimate from the origin")
    common(sp, func=cmd_cc_bench)
    sp.add_argument("--cc-segments", type=int, default=64)
    sp.add_argument("--cc-iters", type=int, default=400)
    sp.add_argument("--cc-penalty", type=float, default=1e4)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    argv = list(sys.argv[1:] if argv is None else argv)
    if not argv:
        parser.print_usage(sys.stderr)
        print(_registry_text(), file=sys.stderr)
        return 2
    try:
        args = parser.parse_args(argv)
    except SystemExit as e:
        return int(e.code or 0)
    if args.command is None:
        parser.print_usage(sys.stderr)
        return 2
    try:
        if args.config:
            cfg = json.loads(Path(args.config).read_text())
            explicit = {a.split("=")[0].lstrip("-").replace("-", "_") for a in argv if a.startswith("--")}
            for k, v in cfg.items():
                if k not in explicit:
                    setattr(args, k, v)
        if args.threads < 1:
            raise InvalidArgument("--threads must be at least 1")
        return args.func(args)
    except (InvalidArgument, UnsupportedMetric) as e:
        print(f"error: {e}", file=sys.stderr)
        print(_registry_text(), file=sys.stderr)
        return 2
    except ExperimentInvalid as e:
        print(f"experiment invalid: {e}", file=sys.stderr)
        return 3
    except OSError as e:
        print(f"error: {e}", file=sys.stderr)
        return 2


def main() -> None:
    sys.exit(run())
