"""Command-line entry point.

Exit codes: 0 success, 1 input validation, 2 numerical failure, 3 verification
failure.  Data goes to stdout, diagnostics to stderr.
"""

from __future__ import annotations

import argparse
import json
import math
import sys
import time
from pathlib import Path

from . import __version__
from . import numerics as nx
from . import pointint as pt
from .cayley import cayley_transform
from .errors import InputError, KreinLabError, NumericalError
from .extensions import krein_resolvent, pair_from_json, q_operator, secular
from .triplet import m_operator, resolvent, triplet_from_json
from .verify import VerifyConfig, run_suite, thread_count

EXIT_OK, EXIT_INPUT, EXIT_NUMERICAL, EXIT_VERIFY = 0, 1, 2, 3


class _Parser(argparse.ArgumentParser):
    """argparse exits with 2 on bad usage; here that is an input error."""

    def error(self, message: str):
        self.print_usage(sys.stderr)
        self.exit(EXIT_INPUT, f"{self.prog}: error: {message}\n")


def parse_complex(text: str) -> complex:
    """Parse ``"a+bi"``, ``"a-bi"``, ``"a"`` or ``"bi"`` (whitespace allowed)."""
    s = "".join(str(text).split()).lower().replace("i", "j")
    if s.count("j") > 1 or not s or "n" in s:  # rejects nan/inf spellings too
        raise InputError(f"cannot parse complex number {text!r}")
    try:
        z = complex(s)
    except ValueError as exc:
        raise InputError(f"cannot parse complex number {text!r}") from exc
    if not (math.isfinite(z.real) and math.isfinite(z.imag)):
        raise InputError(f"complex number must be finite: {text!r}")
    return z


def _load_json(path: str) -> object:
    try:
        return json.loads(Path(path).read_text())
    except OSError as exc:
        raise InputError(f"cannot read {path}: {exc.strerror}") from exc
    except json.JSONDecodeError as exc:
        raise InputError(f"{path} is not valid JSON: {exc}") from exc


def _emit(obj: dict) -> None:
    sys.stdout.write(json.dumps(obj, indent=2, allow_nan=False) + "\n")


def _header(command: str) -> dict:
    return {"tool": "kreinlab", "version": __version__, "command": command}


def cmd_verify(args) -> int:
    cfg = VerifyConfig(args.seed, args.instances, args.n_min, args.n_max, args.m_min, args.m_max, args.tol)
    cfg.validate()
    threads = thread_count()
    t0 = time.perf_counter()
    report = run_suite(cfg, threads)
    elapsed = time.perf_counter() - t0
    if args.timing:
        report["elapsed"] = elapsed
    print(f"verify: {cfg.instances} instances in {elapsed:.2f} s, pass={report['pass']}", file=sys.stderr)
    _emit(report)
    return EXIT_OK if report["pass"] else EXIT_VERIFY


_NEEDS_PAIR = {"q", "krein", "secular"}


def cmd_triplet_eval(args) -> int:
    T = triplet_from_json(_load_json(args.input))
    z = parse_complex(args.z)
    P = pair_from_json(T, _load_json(args.pair)) if args.pair else None
    if args.what in _NEEDS_PAIR and P is None:
        raise InputError(f"--what {args.what} requires --pair")
    out = _header("triplet eval")
    out.update({"what": args.what, "z": [z.real, z.imag]})
    if args.what == "m":
        out["value"] = nx.matrix_to_json(m_operator(T, z))
    elif args.what == "q":
        out["value"] = nx.matrix_to_json(q_operator(T, P, z))
    elif args.what == "resolvent":
        out["value"] = nx.matrix_to_json(resolvent(T, z))
    elif args.what == "krein":
        out["value"] = nx.matrix_to_json(krein_resolvent(T, P, z))
    elif args.what == "theta":
        out["value"] = nx.matrix_to_json(cayley_transform(T, z))
    else:
        out["value"] = secular(T, P, z).to_json()
    _emit(out)
    return EXIT_OK


def cmd_pointint_spectrum(args) -> int:
    model = pt.model_from_json(_load_json(args.model))
    states = pt.bound_states(model, args.zmin, args.zmax, args.samples)
    out = _header("pointint spectrum")
    out.update({
        "n_centers": model.n,
        "z_range": [args.zmin, args.zmax],
        "samples": args.samples,
        "tolerances": {
            "bisection_xtol_rel": 1e-12,
            "kernel_rel_tol": pt.KERNEL_REL_TOL,
            "branch_cut_distance": pt.CUT_TOL,
            "z_max_margin": pt.Z_MAX_MARGIN,
        },
        "energy_convention": "E = z - 1",
        "bound_states": [s.to_json() for s in states],
    })
    _emit(out)
    return EXIT_OK


def cmd_pointint_kernel(args) -> int:
    model = pt.model_from_json(_load_json(args.model))
    z = parse_complex(args.z)
    lattice, y = pt.lattice_from_json(_load_json(args.grid))
    text = pt.rows_to_csv(pt.kernel_grid(model, z, lattice, y))
    if args.out and args.out != "-":
        try:
            Path(args.out).write_text(text)
        except OSError as exc:
            raise InputError(f"cannot write {args.out}: {exc.strerror}") from exc
    else:
        sys.stdout.write(text)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="kreinlab", description=__doc__.splitlines()[0])
    p.add_argument("--version", action="version", version=f"kreinlab {__version__}")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    v = sub.add_parser("verify", help="run the seeded identity suite")
    v.add_argument("--seed", type=int, default=0)
    v.add_argument("--instances", type=int, default=100)
    v.add_argument("--n-min", type=int, default=2)
    v.add_argument("--n-max", type=int, default=12)
    v.add_argument("--m-min", type=int, default=1)
    v.add_argument("--m-max", type=int, default=4)
    v.add_argument("--tol", type=float, default=1e-9)
    v.add_argument("--timing", action="store_true", help="include elapsed seconds in the report")
    v.set_defaults(func=cmd_verify)

    t = sub.add_parser("triplet", help="triplet evaluations")
    tsub = t.add_subparsers(dest="triplet_command", required=True, parser_class=_Parser)
    te = tsub.add_parser("eval", help="evaluate a matrix function at z")
    te.add_argument("--input", required=True, help="triplet JSON file")
    te.add_argument("--pair", help="boundary pair JSON file")
    te.add_argument("--z", required=True, help='complex number such as "0.5-1i"')
    te.add_argument("--what", required=True, choices=["m", "q", "resolvent", "krein", "theta", "secular"])
    te.set_defaults(func=cmd_triplet_eval)

    q = sub.add_parser("pointint", help="point interactions in R^3")
    qsub = q.add_subparsers(dest="pointint_command", required=True, parser_class=_Parser)
    qs = qsub.add_parser("spectrum", help="bound states on a real interval")
    qs.add_argument("--model", required=True)
    qs.add_argument("--zmin", type=float, required=True)
    qs.add_argument("--zmax", type=float, required=True)
    qs.add_argument("--samples", type=int, default=400)
    qs.set_defaults(func=cmd_pointint_spectrum)
    qk = qsub.add_parser("kernel", help="resolvent kernel on a lattice, as CSV")
    qk.add_argument("--model", required=True)
    qk.add_argument("--z", required=True)
    qk.add_argument("--grid", required=True)
    qk.add_argument("--out", help="output file (default stdout)")
    qk.set_defaults(func=cmd_pointint_kernel)
    return p


def main(argv: list[str] | None = None) -> int:
    args = build_parser().parse_args(argv)
    try:
        return args.func(args)
    except InputError as exc:
        print(f"kreinlab: input error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    except (NumericalError, ArithmeticError) as exc:
        print(f"kreinlab: numerical failure ({type(exc).__name__}): {exc}", file=sys.stderr)
        return EXIT_NUMERICAL
    except KreinLabError as exc:  # pragma: no cover - every subclass is one of the above
        print(f"kreinlab: {exc}", file=sys.stderr)
        return EXIT_NUMERICAL


if __name__ == "__main__":
    sys.exit(main())
