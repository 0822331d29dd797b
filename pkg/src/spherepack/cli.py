"""Command-line interface.

Exit status: 0 when the command's check passes, 1 when it fails or a
geometric error is raised, 2 on usage or file-format errors.
"""

from __future__ import annotations

import argparse
import math
import sys

import numpy as np

from . import construction
from .errors import (
    CertificateError,
    ConstructionError,
    EmptyPackingError,
    InvalidInputError,
    OverlapError,
    PackingFileError,
    PropertyViolationError,
)
from .io import dumps_packing, load_packing, report_convergence
from .packing import (
    DEFAULT_RTOL,
    NERVE_BOUND,
    build_nerve,
    check_nerve_condition,
    exterior_pole,
    packing_stats,
    project_packing,
    validate_packing,
)
from .shell import ShellParams, shell_certificate


def _emit(text: str, path: str | None) -> None:
    if path is None or path == "-":
        sys.stdout.write(text)
    else:
        with open(path, "w") as fh:
            fh.write(text)


def _cmd_generate(args) -> int:
    D = construction.build_d600()
    if args.what == "d600":
        P = D
    else:
        seed = construction.build_sigma(D)
        P, tallies = construction.build_pn(seed, args.n, args.mode)
        t = tallies[-1]
        print(f"P_{t.n}: {t.ball_count} balls, {t.tangency_count} tangencies, k = {t.k} "
              f"({float(t.k):.7f}), mode {args.mode}", file=sys.stderr)
    _emit(dumps_packing(P), args.output)
    return 0


def _cmd_verify(args) -> int:
    P = load_packing(args.file)
    rep = validate_packing(P, args.rtol)
    print(f"chart: {P.chart}")
    print(f"balls: {len(P)}")
    if rep.worst_pair is not None:
        print(f"worst gap: {rep.worst_gap:.6e} (relative {rep.worst_relative_gap:.6e}) "
              f"between balls {rep.worst_pair[0]} and {rep.worst_pair[1]}")
    print(f"overlapping pairs: {rep.overlap_count}")
    print(f"valid: {rep.ok}")
    return 0 if rep.ok else 1


def _cmd_nerve(args) -> int:
    P = load_packing(args.file)
    G = build_nerve(P, args.rtol, args.strategy)
    print(f"vertices: {G.vertex_count}")
    print(f"edges: {G.edge_count}")
    if args.edges:
        for i, j in G.edge_array.tolist():
            print(f"{i} {j}")
    return 0


def _cmd_stats(args) -> int:
    P = load_packing(args.file)
    strategy = args.strategy or ("grid" if P.chart == "r3" else "all_pairs")
    G = build_nerve(P, args.rtol, strategy)
    st = packing_stats(P, G)
    ok = check_nerve_condition(st.ball_count, st.tangency_count)
    degrees = np.bincount(G.degrees) if len(P) else np.zeros(1, dtype=int)
    print(f"balls: {st.ball_count}")
    print(f"tangencies: {st.tangency_count}")
    print(f"k: {st.average_kissing} = {st.k:.10f}")
    print(f"degree histogram: " + ", ".join(f"{d}:{c}" for d, c in enumerate(degrees.tolist()) if c))
    print(f"max larger-or-equal neighbors: {st.larger_neighbor_max}")
    if P.chart == "s3" and G.edge_count:
        e = G.edge_array
        dots = np.einsum("ij,ij->i", P.centers[e[:, 0]], P.centers[e[:, 1]])
        ang = np.degrees(2 * np.arcsin(np.linalg.norm(P.centers[e[:, 0]] - P.centers[e[:, 1]], axis=1) / 2))
        print(f"tangent center distances: {ang.min():.12f} .. {ang.max():.12f} deg "
              f"(dot {dots.min():.15f} .. {dots.max():.15f})")
    print(f"2|E| < (8+4*sqrt(3))|V| ({2 * st.tangency_count} < {NERVE_BOUND * st.ball_count:.6f}): {ok}")
    return 0 if ok else 1


def _cmd_bound(args) -> int:
    P = load_packing(args.file)
    if P.chart != "r3":
        raise InvalidInputError("bound needs an r3 packing; run `project` first")
    params = ShellParams(args.rho)
    G = build_nerve(P, args.rtol, "grid")
    rep = shell_certificate(P, G, params)
    print(f"rho: {rep.rho:.10f}")
    print(f"max occupancy: {rep.max_occupancy:.12f}")
    print(f"min tangent pair sum: {rep.min_pair_sum:.15f} (constant {params.pair_constant:.15f})")
    print(f"k: {rep.k:.10f}")
    print(f"bound: {rep.k_bound:.10f}")
    print(f"pass: {rep.passed}")
    return 0 if rep.passed else 1


def _parse_pole(text: str) -> np.ndarray:
    try:
        v = np.array([float(x) for x in text.split(",")])
    except ValueError as exc:
        raise InvalidInputError(f"--pole: cannot parse {text!r}") from exc
    if v.shape != (4,):
        raise InvalidInputError("--pole needs four comma-separated numbers")
    return v / np.linalg.norm(v)


def _cmd_project(args) -> int:
    P = load_packing(args.file)
    pole = exterior_pole(P) if args.pole == "auto" else _parse_pole(args.pole)
    Q = project_packing(P, pole)
    print("pole: " + ",".join("%.17g" % x for x in pole), file=sys.stderr)
    _emit(dumps_packing(Q), args.output)
    return 0


def _cmd_report(args) -> int:
    if args.max_n < 0:
        raise InvalidInputError("--max-n must be non-negative")
    _emit(report_convergence(args.max_n), args.output)
    return 0


def _cmd_seed(args) -> int:
    D = construction.build_d600()
    seed = construction.build_sigma(D)
    claim = construction.verify_separation_claim(seed)
    iface = construction.verify_layer_interface(seed)
    print(f"inversion sphere radius: {math.degrees(seed.S.radius):.4f} deg ({seed.S.radius!r} rad)")
    print(f"contraction per layer: {seed.S.contraction:.10f}")
    print(f"min center distance from b over P0\\R: {math.degrees(claim.min_center_angle):.10f} deg")
    print(f"min nearest-point distance: {math.degrees(claim.min_nearest_angle):.10f} deg")
    print(f"slack over S: {math.degrees(claim.slack):.4f} deg")
    print(f"window: {iface.window_balls} balls, {iface.window_tangencies} tangencies, "
          f"{iface.new_tangencies} new; shared layer matches {iface.shared_matches}")
    return 0


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="spherepack", description="Layered sphere packings and kissing-number bounds.")
    sub = p.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="write a packing file")
    g.add_argument("what", choices=["d600", "pn"])
    g.add_argument("--n", type=int, default=0)
    g.add_argument("--mode", choices=["direct", "windowed"], default="direct")
    g.add_argument("-o", "--output")
    g.set_defaults(func=_cmd_generate)

    v = sub.add_parser("verify", help="check that ball interiors are disjoint")
    v.add_argument("file")
    v.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    v.set_defaults(func=_cmd_verify)

    n = sub.add_parser("nerve", help="tangency graph")
    n.add_argument("file")
    n.add_argument("--strategy", choices=["grid", "all_pairs"], default="all_pairs")
    n.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    n.add_argument("--edges", action="store_true", help="also list the edges")
    n.set_defaults(func=_cmd_nerve)

    s = sub.add_parser("stats", help="kissing statistics")
    s.add_argument("file")
    s.add_argument("--strategy", choices=["grid", "all_pairs"])
    s.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    s.set_defaults(func=_cmd_stats)

    b = sub.add_parser("bound", help="shell-area certificate for an r3 packing")
    b.add_argument("file")
    b.add_argument("--rho", type=float, default=math.sqrt(3.0))
    b.add_argument("--rtol", type=float, default=DEFAULT_RTOL)
    b.set_defaults(func=_cmd_bound)

    pr = sub.add_parser("project", help="stereographic projection of an s3 packing")
    pr.add_argument("file")
    pr.add_argument("--pole", required=True, help="w,x,y,z or 'auto'")
    pr.add_argument("-o", "--output")
    pr.set_defaults(func=_cmd_project)

    r = sub.add_parser("report", help="convergence CSV of k(P_n)")
    r.add_argument("--max-n", type=int, required=True)
    r.add_argument("-o", "--output")
    r.set_defaults(func=_cmd_report)

    sd = sub.add_parser("seed", help="inversion sphere and separation checks")
    sd.set_defaults(func=_cmd_seed)
    return p


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except (PackingFileError, InvalidInputError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except (OverlapError, EmptyPackingError, ConstructionError, PropertyViolationError, CertificateError) as exc:
        print(f"fail: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
