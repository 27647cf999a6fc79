"""Command-line front end.

Exit codes: 0 success, 1 I/O failure, 2 membership failure, 3 bad
parameter, 4 matching failure, 5 branch edge, 6 certificate failed.
"""
from __future__ import annotations

import argparse
import itertools
import sys
import warnings
from pathlib import Path

import numpy as np

from .clustering import cpa_hermitian, cpa_normal
from .errors import BadParameterError, CommPathError
from .io import (
    decode_path,
    decode_system,
    decode_tolerances,
    encode_path,
    load_tuple,
    read_json,
    save_tuple,
    write_json,
    write_text,
)
from .linalg import DEFAULT_TOL, ToleranceConfig
from .spectra import JOINT_SEED
from .synthesis import connect, connect_nearly_algebraic, nearly_budget
from .tuples import MultiPoly, MultiPolySystem, ZeroSet, validate_zero_set
from .verify import (
    certify_path,
    conjugation_perturb,
    eigen_perturb,
    random_unitary,
    tuple_from_rows,
    uniformity_sweep,
)

EXIT_CERT_FAIL = 6


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(BadParameterError.exit_code, f"{self.prog}: error: {message}\n")


def cube_vertices(m: int, tol: ToleranceConfig = DEFAULT_TOL) -> tuple[MultiPolySystem, ZeroSet]:
    """``x_k^2 - 1 = 0`` for every k, with zero set {-1, 1}^m."""
    polys = []
    for k in range(m):
        sq = [0] * m
        sq[k] = 2
        polys.append(MultiPoly(m, {tuple(sq): 1.0, (0,) * m: -1.0}))
    P = MultiPolySystem(m, tuple(polys))
    return P, validate_zero_set(P, list(itertools.product([-1.0, 1.0], repeat=m)), tol)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        return float(obj)
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, (complex, np.complexfloating)):
        return [float(obj.real), float(obj.imag)]
    return obj


def _tolerances(args) -> ToleranceConfig:
    return decode_tolerances(read_json(args.config)) if args.config else DEFAULT_TOL


def _constraints(path, tol, need_zeros=True):
    P, Z = decode_system(read_json(path), tol)
    if need_zeros and Z is None:
        raise BadParameterError(f"{path} has no zero_set")
    return P, Z


def _positive_int(text: str) -> int:
    try:
        v = int(text)
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected an integer, got {text!r}")
    if v < 1:
        raise argparse.ArgumentTypeError("expected a positive integer")
    return v


def _dims(text: str) -> list[int]:
    try:
        dims = [int(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"dims must be a comma-separated list of integers, got {text!r}")
    if not dims or min(dims) < 1:
        raise argparse.ArgumentTypeError("dims must be a nonempty list of positive integers")
    return dims


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

def cmd_gen(args) -> int:
    tol = _tolerances(args)
    if args.zeros:
        P, Z = _constraints(args.zeros, tol)
        if args.m is not None and args.m != Z.m:
            raise BadParameterError(f"--m {args.m} disagrees with the {Z.m} variables in {args.zeros}")
    else:
        P, Z = cube_vertices(args.m or 2, tol)
    if args.perturb < 0 or args.conjugate < 0:
        raise BadParameterError("--perturb and --conjugate must be nonnegative")
    if args.perturb > 0 and args.conjugate > 0:
        raise BadParameterError("--perturb and --conjugate cannot be combined")
    rng = np.random.default_rng(args.seed)
    rows = Z.points[rng.integers(Z.size, size=args.n)]
    U = random_unitary(args.n, rng)
    X = tuple_from_rows(rows, U, Z.is_real)
    if args.conjugate > 0:
        X = conjugation_perturb(X, args.conjugate, np.random.default_rng([args.seed, 1]))
    if args.perturb > 0:
        # moving eigenvalues in the same basis keeps the twin distance below --perturb
        moved = eigen_perturb(rows, args.perturb, np.random.default_rng([args.seed, 2]), Z.is_real)
        X = tuple_from_rows(moved, U, Z.is_real)
    save_tuple(args.out, X)
    return 0


def cmd_precondition(args) -> int:
    tol = _tolerances(args)
    X = load_tuple(args.input)
    cpa = cpa_hermitian if args.family == "cube" else cpa_normal
    res = cpa(X, args.delta, tol)
    save_tuple(args.out, res.approximant)
    report = {
        "family": args.family,
        "delta": res.delta_used,
        "achieved_distance": res.achieved_distance,
        "degrees": res.degrees,
        "minimal_polys": [
            {"degree": p.degree(), "coefficients": [[float(np.real(c)), float(np.imag(c))] for c in p.coef]}
            for p in res.minimal_polys
        ],
        "tolerances": tol.to_dict(),
        "seed": JOINT_SEED,
    }
    if args.report:
        write_json(args.report, report)
    return 0


def _certify_and_write(args, path, X, Y, P, Z, tol, extra_notes=None, caught=()) -> int:
    poly_gate, strict = None, False
    if args.nearly:
        poly_gate, strict = nearly_budget(P, Z, args.epsilon).delta_prime, True
    cert = certify_path(path, X, Y, P, args.epsilon, args.family, args.samples, tol, poly_gate, strict)
    doc = {
        "certificate": cert.to_dict(),
        "tolerances": tol.to_dict(),
        "seed": JOINT_SEED,
        "notes": _jsonable(extra_notes or {}),
        "warnings": [str(w.message) for w in caught],
    }
    write_json(args.cert, doc)
    if args.figure:
        from .plotting import certificate_figure

        certificate_figure(cert, args.figure)
    print(f"verdict: {cert.verdict}" + (f" ({', '.join(cert.failures)})" if cert.failures else ""))
    return 0 if cert.passed else EXIT_CERT_FAIL


def cmd_connect(args) -> int:
    tol = _tolerances(args)
    X, Y = load_tuple(args.x), load_tuple(args.y)
    P, Z = _constraints(args.constraints, tol)
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always", RuntimeWarning)
        if args.nearly:
            path = connect_nearly_algebraic(X, Y, P, Z, args.epsilon, args.family, tol)
        else:
            path = connect(X, Y, P, Z, args.epsilon, args.family, tol)
    write_json(args.out, encode_path(path))
    return _certify_and_write(args, path, X, Y, P, Z, tol, path.notes, caught)


def cmd_certify(args) -> int:
    tol = _tolerances(args)
    X, Y = load_tuple(args.x), load_tuple(args.y)
    P, Z = _constraints(args.constraints, tol, need_zeros=args.nearly)
    path = decode_path(read_json(args.path), tol)
    return _certify_and_write(args, path, X, Y, P, Z, tol)


def cmd_sweep(args) -> int:
    tol = _tolerances(args)
    if args.zeros:
        P, Z = _constraints(args.zeros, tol)
    else:
        P, Z = cube_vertices(args.m, tol)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        report = uniformity_sweep(
            Z, args.epsilon, args.dims, args.seed, P, args.magnitude, args.cpa_delta, args.samples, tol
        )
    write_text(args.out, report.to_csv())
    if not args.no_figure:
        from .plotting import sweep_figure

        fig_path = args.figure or Path(args.out).with_suffix(".png")
        sweep_figure(report, fig_path)
    return 0


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="commpath", description=__doc__.splitlines()[0])
    parser.add_argument("--config", help="JSON file overriding tolerance defaults")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    g = sub.add_parser("gen", help="write a seeded random member (or near-member)")
    g.add_argument("--n", type=_positive_int, required=True)
    g.add_argument("--m", type=_positive_int)
    g.add_argument("--zeros", help="constraint file with a zero set (default: {-1,1}^m)")
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--perturb", type=float, default=0.0, help="move joint eigenvalues by at most this much")
    g.add_argument("--conjugate", type=float, default=0.0, help="conjugate to this metric distance")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_gen)

    p = sub.add_parser("precondition", help="clustered approximant of a tuple")
    p.add_argument("--in", dest="input", required=True)
    p.add_argument("--delta", type=float, required=True)
    p.add_argument("--family", choices=("cube", "disk"), default="cube")
    p.add_argument("--out", required=True)
    p.add_argument("--report")
    p.set_defaults(func=cmd_precondition)

    def path_flags(c):
        c.add_argument("--x", required=True)
        c.add_argument("--y", required=True)
        c.add_argument("--constraints", required=True)
        c.add_argument("--epsilon", type=float, required=True)
        c.add_argument("--family", choices=("cube", "disk"), default="cube")
        c.add_argument("--nearly", action="store_true", help="endpoints are only nearly algebraic")
        c.add_argument("--samples", type=int, default=129)
        c.add_argument("--cert", required=True)
        c.add_argument("--figure", help="PNG of distance to Y along the path")

    c = sub.add_parser("connect", help="build and certify a path")
    path_flags(c)
    c.add_argument("--out", required=True, help="path file")
    c.set_defaults(func=cmd_connect)

    v = sub.add_parser("certify", help="certify an existing path file")
    path_flags(v)
    v.add_argument("--path", required=True)
    v.set_defaults(func=cmd_certify)

    s = sub.add_parser("sweep", help="uniformity-in-n sweep to CSV")
    s.add_argument("--zeros", help="constraint file with a zero set (default: {-1,1}^m)")
    s.add_argument("--m", type=_positive_int, default=2)
    s.add_argument("--epsilon", type=float, default=0.25)
    s.add_argument("--dims", type=_dims, default=[2, 4, 8, 16, 32])
    s.add_argument("--seed", type=int, default=0)
    s.add_argument("--magnitude", type=float, help="perturbation size (default: a-priori budget)")
    s.add_argument("--cpa-delta", type=float, default=0.5)
    s.add_argument("--samples", type=int, default=129)
    s.add_argument("--out", required=True)
    s.add_argument("--figure", help="figure path (default: CSV path with .png suffix)")
    s.add_argument("--no-figure", action="store_true")
    s.set_defaults(func=cmd_sweep)
    return parser


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except CommPathError as exc:
        print(f"commpath {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return exc.exit_code


if __name__ == "__main__":
    sys.exit(main())
