"""Command-line entry point: determine, verify, reduce, solve, surface, check, bessel.

Exit codes: 0 success, 1 a verification failed, 2 usage error, 3 numeric failure.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import sys
import time
from fractions import Fraction
from pathlib import Path

from . import __version__
from .errors import LiesymError, NegativeBesselArgument, NumericFailure, VerificationFailed
from .expr.calculus import probe_seed

EXIT_OK, EXIT_FAIL, EXIT_USAGE, EXIT_NUMERIC = 0, 1, 2, 3
PARAM_NAMES = ("k1", "k2", "k3", "k4", "k5")


class UsageError(Exception):
    pass


def _rational(text: str) -> Fraction:
    try:
        return Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"not a rational number: {text!r}") from exc


def _range(text: str):
    try:
        a, b = (float(v) for v in text.split(":"))
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected a:b, got {text!r}") from exc
    if not a < b:
        raise argparse.ArgumentTypeError(f"empty range {text!r}")
    return a, b


def _emit(obj) -> None:
    print(json.dumps(obj, indent=2, sort_keys=False))


def _manifest(args, outputs, inputs=(), started=0.0, extra=None) -> dict:
    params = {k: (str(v) if isinstance(v, (Fraction, Path)) else v) for k, v in vars(args).items()
              if k not in ("func",) and v is not None}
    body = {
        "subcommand": args.command,
        "params": params,
        "inputs": [str(p) for p in inputs],
        "outputs": [str(p) for p in outputs],
        "version": __version__,
        "seed": probe_seed(),
    }
    body["hash"] = hashlib.sha256(json.dumps(body, sort_keys=True).encode()).hexdigest()[:16]
    body["duration_s"] = round(time.perf_counter() - started, 6)
    if extra:
        body.update(extra)
    return body


def _write_manifest(path: Path, manifest: dict) -> None:
    Path(str(path) + ".json").write_text(json.dumps(manifest, indent=2) + "\n", encoding="utf-8")


def _case_params(args) -> dict:
    return {k: getattr(args, k) for k in PARAM_NAMES if getattr(args, k, None) is not None}


# ---------------------------------------------------------------- subcommands

def cmd_determine(args) -> int:
    from .determining import determining_system

    system = determining_system()
    _emit({"equations": system.to_json(), "remainder": "0"})
    return EXIT_OK


def _parse_vf(text: str):
    from .expr import parse
    from .prolongation import VectorField

    parts = {}
    for chunk in text.split(";"):
        if not chunk.strip():
            continue
        name, _, value = chunk.partition("=")
        name = name.strip()
        if name not in ("xi", "tau", "eta") or not value.strip():
            raise UsageError(f"bad vector-field component {chunk!r}; expected xi=..;tau=..;eta=..")
        parts[name] = parse(value)
    missing = {"xi", "tau", "eta"} - set(parts)
    if missing:
        raise UsageError(f"vector field is missing {sorted(missing)}")
    return VectorField(parts["xi"], parts["tau"], parts["eta"])


def cmd_verify(args) -> int:
    from .classifier import build_case, run_controls
    from .determining import is_symmetry, make_pde
    from .expr import parse

    ok = True
    if args.controls:
        for ctl, observed in run_controls():
            good = observed == ctl.expected
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} {ctl.name}: symmetry={observed} expected={ctl.expected}")
    elif args.case:
        case = build_case(args.case, {k: str(v) for k, v in _case_params(args).items()})
        for i, gen in enumerate(case.generators, 1):
            good = is_symmetry(gen, case.pde)
            ok &= good
            print(f"{'PASS' if good else 'FAIL'} case {case.tag} X{i} = {gen}")
    elif args.vf:
        if not (args.f and args.g):
            raise UsageError("--vf needs --f and --g")
        vf = _parse_vf(args.vf)
        good = is_symmetry(vf, make_pde(parse(args.f), parse(args.g)))
        ok = good
        print(f"{'PASS' if good else 'FAIL'} {vf}")
    else:
        raise UsageError("verify needs --case, --controls or --vf")
    return EXIT_OK if ok else EXIT_FAIL


def cmd_reduce(args) -> int:
    from .reduction import reduce_case_a, reduce_case_b, reduce_case_c

    params = {k: str(v) for k, v in _case_params(args).items()}
    case = args.case.lower()
    if case == "a":
        sol = reduce_case_a(params)
    elif case == "b":
        sol = reduce_case_b(params)
    else:
        sol = reduce_case_c(params, which=args.branch)
    if sol.tag == "C-log":
        print("note: the log-branch solution carries a 1/k2 factor on the logarithm; "
              "without it the function solves the PDE only for k2 = 1", file=sys.stderr)
    out = sol.to_json()
    out["verified"] = sol.verified
    _emit(out)
    return EXIT_OK if sol.verified else EXIT_FAIL


def cmd_solve(args) -> int:
    from .numerics.similarity import solve_example2, write_trajectory_csv

    started = time.perf_counter()
    if not args.example2:
        raise UsageError("solve currently supports --example2 only")
    traj = solve_example2(args.k2, float(args.h0), float(args.dh0), args.span, args.tol)
    extra = {"trajectory": {"accepted": traj.accepted, "rejected": traj.rejected, "tol": args.tol,
                            "h_init": float(args.h0), "dh_init": float(args.dh0), "z_init": 1.0,
                            "params": traj.meta["params"]}}
    if args.out:
        write_trajectory_csv(traj, args.out)
        _write_manifest(args.out, _manifest(args, [args.out], started=started, extra=extra))
    else:
        write_trajectory_csv(traj, sys.stdout)
    return EXIT_OK


def cmd_surface(args) -> int:
    from .numerics.similarity import (
        CaseAParams, CaseASolution, read_trajectory_csv, surface_case_a, write_surface_csv,
    )

    started = time.perf_counter()
    p = CaseAParams(args.k1, args.k2, args.k3, args.k4)
    traj = read_trajectory_csv(args.traj, p)
    sidecar = Path(str(args.traj) + ".json")
    source = traj
    mode = "dense-output"
    if sidecar.exists():
        info = json.loads(sidecar.read_text(encoding="utf-8")).get("trajectory", {})
        if info.get("params") == p.as_dict():
            # re-integrate onto every node from the recorded initial data
            lo, hi = traj.span
            source = CaseASolution(p, info["h_init"], info["dh_init"], info.get("z_init", 1.0),
                                   min(info.get("tol", 1e-10), 1e-12), zmin=lo, zmax=hi)
            mode = "exact-landing"
    grid = surface_case_a(p, source, args.xrange, args.trange, args.nx, args.nt)
    extra = {"surface": {**grid.params, "evaluation": mode}}
    if args.out:
        write_surface_csv(grid, args.out)
        _write_manifest(args.out, _manifest(args, [args.out], [args.traj], started, extra))
    else:
        write_surface_csv(grid, sys.stdout)
    return EXIT_OK


def cmd_check(args) -> int:
    from . import pde_check

    sol = args.solution
    if sol[0] == "surface":
        if len(sol) != 2:
            raise UsageError("check --solution surface needs a file")
        import numpy as np

        from .numerics.similarity import read_surface_csv

        path = Path(sol[1])
        grid = read_surface_csv(path)
        sidecar = Path(str(path) + ".json")
        params = json.loads(sidecar.read_text(encoding="utf-8"))["surface"]["params"] if sidecar.exists() else None
        if params is None:
            raise UsageError(f"{path} has no parameter sidecar {sidecar}")
        k1, k2, k3, k4 = (float(Fraction(params[k])) for k in ("k1", "k2", "k3", "k4"))
        f = lambda w: k3 * np.exp(k4 * w)
        g = lambda w: k1 * np.exp(k2 * w)
        report = pde_check.grid_ladder(grid.u, grid.x, grid.t, f, g, rungs=args.ladder)
        name = f"surface {path}"
    else:
        if len(sol) != 1 or sol[0] not in pde_check.REFERENCES:
            raise UsageError(f"unknown solution {' '.join(sol)!r}; choose from {sorted(pde_check.REFERENCES)} or surface FILE")
        report = pde_check.check_reference(sol[0], rungs=args.ladder)
        name = sol[0]
    out = report.to_json()
    out["solution"] = name
    _emit(out)
    print(f"{'PASS' if report.passes() else 'FAIL'} {name} slope={report.slope}")
    return EXIT_OK if report.passes() else EXIT_FAIL


def cmd_bessel(args) -> int:
    from .numerics.bessel import FUNCTIONS

    print(f"{FUNCTIONS[args.fn](args.x):.17g}")
    return EXIT_OK


# ---------------------------------------------------------------- parser

def _add_params(p, names=PARAM_NAMES, rational=False, defaults=None):
    for n in names:
        kw = {"type": _rational} if rational else {}
        if defaults and n in defaults:
            kw["default"] = defaults[n]
        p.add_argument(f"--{n}", **kw)


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="liesym", description=__doc__.splitlines()[0])
    ap.add_argument("--version", action="version", version=__version__)
    sub = ap.add_subparsers(dest="command", required=True)

    p = sub.add_parser("determine", help="coefficients of the symmetry condition")
    p.set_defaults(func=cmd_determine)

    p = sub.add_parser("verify", help="check generators against the PDE")
    p.add_argument("--case", choices=["a", "b", "c", "A", "B", "C"])
    p.add_argument("--controls", action="store_true")
    p.add_argument("--vf", help='"xi=...;tau=...;eta=..."')
    p.add_argument("--f")
    p.add_argument("--g")
    _add_params(p)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("reduce", help="similarity reduction of a case")
    p.add_argument("--case", required=True, choices=["a", "b", "c", "A", "B", "C"])
    p.add_argument("--branch", choices=["scale", "log"], default="scale", help="case c only")
    _add_params(p)
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("solve", help="integrate the example reduced ODE")
    p.add_argument("--example2", action="store_true")
    p.add_argument("--k2", type=_rational, required=True)
    p.add_argument("--h0", type=float, default=2.0, help="h at z = 1")
    p.add_argument("--dh0", type=float, default=2.5, help="h' at z = 1")
    p.add_argument("--span", type=_range, default=(0.25, 16.0))
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("surface", help="tabulate u(x, t) from a trajectory")
    _add_params(p, ("k1", "k2", "k3", "k4"), rational=True, defaults={"k1": Fraction(1), "k3": Fraction(1)})
    p.add_argument("--traj", type=Path, required=True)
    p.add_argument("--xrange", type=_range, default=(0.5, 2.0))
    p.add_argument("--trange", type=_range, default=(0.5, 2.0))
    p.add_argument("--nx", type=int, default=64)
    p.add_argument("--nt", type=int, default=64)
    p.add_argument("--out", type=Path)
    p.set_defaults(func=cmd_surface)

    p = sub.add_parser("check", help="finite-difference residual ladder")
    p.add_argument("--solution", nargs="+", required=True, metavar="NAME")
    p.add_argument("--ladder", type=int, default=4)
    p.set_defaults(func=cmd_check)

    p = sub.add_parser("bessel", help="evaluate J0, J1, Y0 or Y1")
    p.add_argument("--fn", choices=["j0", "j1", "y0", "y1"], required=True)
    p.add_argument("--x", type=float, required=True)
    p.set_defaults(func=cmd_bessel)
    return ap


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    if args.command == "surface" and (args.k2 is None or args.k4 is None):
        print("error: surface needs --k2 and --k4", file=sys.stderr)
        return EXIT_USAGE
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NumericFailure as exc:
        print(f"numeric failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERIC
    except VerificationFailed as exc:
        print(f"verification failed: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except NegativeBesselArgument as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_FAIL
    except (LiesymError, ValueError) as exc:
        print(f"error ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
