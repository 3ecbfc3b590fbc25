"""Command-line interface: ``bordered-yamabe {validate,lengths,solve,check,probe}``.

Exit codes: 0 ok, 1 usage, 2 invalid surface, 3 inadmissible factor,
4 non-convergence, 5 failed check, 6 failed probe.
"""
import argparse
import sys

import numpy as np
from scipy.linalg import LinAlgError, cholesky

from . import documents, solver
from . import surface as sf
from .errors import AdmissibilityError, NonConvergenceError, NumericError, ProbeError, RangeError

EXIT_OK, EXIT_USAGE, EXIT_SURFACE, EXIT_ADMISSIBLE = 0, 1, 2, 3
EXIT_CONVERGENCE, EXIT_CHECK, EXIT_PROBE = 4, 5, 6


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise UsageError(message)


def _fmt(x):
    return format(float(x), ".17g")


def _out(*parts):
    print(" ".join(str(p) for p in parts))


def _err(msg):
    print(msg, file=sys.stderr)


def _load(path):
    """Parse and validate a surface; failures map to exit 2 via ``_Fail``."""
    try:
        doc = documents.load_surface(path)
    except documents.DocumentError as exc:
        raise _Fail(EXIT_SURFACE, f"parse error: {exc}") from None
    tri = doc.triangulation()
    report = sf.validate(tri)
    if not report.ok:
        raise _Fail(EXIT_SURFACE, f"invalid surface {path}:\n{report}")
    try:
        return tri, doc.metric()
    except (ValueError, RangeError) as exc:
        raise _Fail(EXIT_SURFACE, f"invalid metric in {path}: {exc}") from None


class _Fail(Exception):
    def __init__(self, code, message):
        super().__init__(message)
        self.code = code


def _factor(tri, values, name="--w"):
    if values is None:
        return np.zeros(tri.n)
    if len(values) != tri.n:
        raise UsageError(f"{name} needs {tri.n} values, got {len(values)}")
    return np.array(values, dtype=float)


def cmd_validate(args):
    try:
        doc = documents.load_surface(args.surface)
    except documents.DocumentError as exc:
        raise _Fail(EXIT_SURFACE, f"parse error: {exc}") from None
    tri = doc.triangulation()
    report = sf.validate(tri)
    if not report.ok:
        raise _Fail(EXIT_SURFACE, str(report))
    _out(f"ok: n={tri.n} |E|={len(tri.edges)} |F|={len(tri.faces)}")
    return EXIT_OK


def cmd_lengths(args):
    tri, l0 = _load(args.surface)
    w = _factor(tri, args.w)
    B = sf.boundary_lengths(tri, l0, w)
    for i, x in enumerate(B, start=1):
        _out(i, _fmt(x))
    return EXIT_OK


def cmd_solve(args):
    tri, l0 = _load(args.surface)
    try:
        targets = documents.load_targets(args.targets, tri.n)
    except documents.DocumentError as exc:
        raise UsageError(str(exc)) from None
    b = np.array(targets.b)
    w0 = None if targets.w0 is None else np.array(targets.w0)
    trace = None
    try:
        if args.method == "flow":
            report, trace = solver.flow_solve(tri, l0, w0, b, solver.FlowConfig(tol=args.tol))
        else:
            report = solver.newton_solve(tri, l0, w0, b, solver.NewtonConfig(tol=args.tol))
    except NonConvergenceError as exc:
        raise _Fail(EXIT_CONVERGENCE, f"no convergence: {exc} "
                                      f"(last residual {_fmt(exc.residual)})") from None
    except NumericError as exc:
        raise _Fail(EXIT_CONVERGENCE, f"numerical breakdown: {exc}") from None

    _out("method", report.method)
    _out("residual", _fmt(report.residual))
    _out("iterations", report.iterations)
    if report.method == "flow":
        _out("time", _fmt(report.time))
        _out("lambda0", "nan" if report.lambda0 is None else _fmt(report.lambda0))
        _out("fit_r2", "nan" if report.fit_r2 is None else _fmt(report.fit_r2))
    for i, x in enumerate(report.w, start=1):
        _out(f"w_{i}", _fmt(x))
    for i, x in enumerate(report.B, start=1):
        _out(f"B_{i}", _fmt(x))
    if args.trace:
        if trace is None:
            raise UsageError("--trace is only available with --method flow")
        with open(args.trace, "w", encoding="utf-8", newline="") as fh:
            trace.write_csv(fh)
    return EXIT_OK


def jacobian_checks(tri, l0, w, h=1e-6, fd_tol=1e-5, sym_tol=1e-12):
    """Worst-case value and pass flag for each structural check of ``L``."""
    L = sf.assemble_jacobian(tri, l0, w)
    sym = float(np.max(np.abs(L - L.T) / np.maximum(1.0, np.abs(L))))
    diag = np.diag(L)
    off = np.abs(L).sum(axis=1) - np.abs(diag)
    dominance = float(np.min(np.abs(diag) - off))
    try:
        cholesky(-L, lower=True)
        chol = True
    except LinAlgError:
        chol = False
    fd = solver.fd_jacobian_check(tri, l0, w, h)
    return [
        ("symmetry", sym, sym <= sym_tol),
        ("negative_diagonal", float(diag.max()), bool(diag.max() < 0)),
        ("diagonal_dominance", dominance, dominance > 0),
        ("cholesky", 1.0 if chol else 0.0, chol),
        ("fd_jacobian", fd, fd <= fd_tol),
    ]


def cmd_check(args):
    tri, l0 = _load(args.surface)
    if args.random:
        if args.w is not None:
            raise UsageError("--w and --random are mutually exclusive")
        rng = np.random.default_rng(args.seed)
        w = sf.sample_admissible(tri, l0, rng, min_margin=0.05)
    else:
        w = _factor(tri, args.w)
    sf.check_admissible(tri, l0, w)
    _out("w", *map(_fmt, w))
    failed = []
    for name, value, ok in jacobian_checks(tri, l0, w, args.h, args.fd_tol):
        _out(name, _fmt(value), "pass" if ok else "FAIL")
        if not ok:
            failed.append(name)
    if failed:
        raise _Fail(EXIT_CHECK, "failed check(s): " + ", ".join(failed))
    return EXIT_OK


def cmd_probe(args):
    tri, l0 = _load(args.surface)
    try:
        rep = solver.probe_limits(
            tri, l0, args.mode, args.boundary, tmax=args.tmax, samples=args.samples,
            edge=args.edge, face=args.face, margin_floor=args.margin_floor,
            low=args.low, high=args.high)
    except ProbeError as exc:
        raise _Fail(EXIT_PROBE, f"probe error: {exc}") from None
    _out("t", "margin", *(f"B_{i}" for i in range(1, tri.n + 1)))
    for t, m, row in zip(rep.t, rep.margin, rep.B):
        _out(_fmt(t), _fmt(m), *map(_fmt, row))
    expect = "below" if rep.mode == "plus-inf" else "above"
    _out("mode", rep.mode, rep.detail)
    _out("trend", f"B_{rep.boundary}", rep.trend)
    _out("extreme", f"B_{rep.boundary}", _fmt(rep.extreme),
         f"expected {expect}", _fmt(rep.threshold))
    if not rep.observed:
        raise _Fail(EXIT_PROBE, f"expected behaviour not observed: B_{rep.boundary} "
                                f"reached {_fmt(rep.extreme)}, needed {expect} "
                                f"{_fmt(rep.threshold)}")
    _out("observed yes")
    return EXIT_OK


def _positive(text):
    value = float(text)
    if not value > 0:
        raise argparse.ArgumentTypeError(f"must be positive, got {text}")
    return value


def build_parser():
    p = _Parser(prog="bordered-yamabe",
                description="Hyperbolic metrics with prescribed geodesic boundary lengths.")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)
    surf_help = "surface document (JSON), or @pair-of-pants / @tetrahedron"

    q = sub.add_parser("validate", help="check triangulation combinatorics")
    q.add_argument("surface", help=surf_help)
    q.set_defaults(func=cmd_validate)

    q = sub.add_parser("lengths", help="print boundary lengths B at a conformal factor")
    q.add_argument("surface", help=surf_help)
    q.add_argument("--w", type=float, nargs="+", help="conformal factor (default 0)")
    q.set_defaults(func=cmd_lengths)

    q = sub.add_parser("solve", help="find w* with B(w*) = b")
    q.add_argument("surface", help=surf_help)
    q.add_argument("targets", help="target document with b and optional w0")
    q.add_argument("--method", choices=("flow", "newton"), default="newton")
    q.add_argument("--tol", type=_positive, default=1e-10)
    q.add_argument("--trace", metavar="CSV", help="write the flow trace here")
    q.set_defaults(func=cmd_solve)

    q = sub.add_parser("check", help="verify structure of the Jacobian L at w")
    q.add_argument("surface", help=surf_help)
    q.add_argument("--w", type=float, nargs="+")
    q.add_argument("--random", action="store_true", help="use a seeded random admissible w")
    q.add_argument("--seed", type=int, default=0)
    q.add_argument("--h", type=_positive, default=1e-6, help="finite-difference step")
    q.add_argument("--fd-tol", type=_positive, default=1e-5)
    q.set_defaults(func=cmd_check)

    q = sub.add_parser("probe", help="sample B along a degenerating ray")
    q.add_argument("surface", help=surf_help)
    q.add_argument("--mode", choices=solver.PROBE_MODES, required=True)
    q.add_argument("--boundary", type=int, default=1)
    q.add_argument("--tmax", type=_positive,
                   help="ray length (default 8 for plus-inf, 130 for mixed)")
    q.add_argument("--samples", type=int)
    q.add_argument("--edge", type=int, help="finite-wall: edge id to approach")
    q.add_argument("--face", type=int, help="mixed: face id to use")
    q.add_argument("--margin-floor", type=_positive, default=1e-6)
    q.add_argument("--low", type=_positive, default=1e-2)
    q.add_argument("--high", type=_positive, default=1e3)
    q.set_defaults(func=cmd_probe)
    return p


def main(argv=None):
    try:
        args = build_parser().parse_args(argv)
        return args.func(args)
    except UsageError as exc:
        _err(f"usage error: {exc}")
        return EXIT_USAGE
    except _Fail as exc:
        _err(str(exc))
        return exc.code
    except AdmissibilityError as exc:
        _err(f"inadmissible conformal factor: {exc}")
        return EXIT_ADMISSIBLE


if __name__ == "__main__":
    sys.exit(main())
