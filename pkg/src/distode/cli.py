"""Command-line front end.

Exit status: 0 on success, 1 when a verification or check fails, 2 on bad
input (syntax, schema, or a violated invariant).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path
from typing import Sequence

import numpy as np

from . import randfam
from .distcore import PiecewiseDist, TestFn, derivative, pair
from .dsl import parse_dist
from .errors import DistodeError, ProblemError
from .interface import InterfaceSpec, classify, f_hat_shift, f_hat_trace, in_kernel
from .odekit import FORMS, Problem, apply_ode2, build_ode2, solve, verify
from .staralg import delta_shift, mollifier_apply, star, tilde_d

EXIT_OK, EXIT_FAIL, EXIT_INPUT = 0, 1, 2


class InputError(Exception):
    """Bad command-line input; maps to exit status 2."""


def load_problem(path: str | Path) -> Problem:
    try:
        text = Path(path).read_text()
    except OSError as exc:
        raise InputError(f"cannot read problem file {path}: {exc.strerror}") from exc
    try:
        data = json.loads(text)
    except json.JSONDecodeError as exc:
        raise InputError(f"problem file {path} is not valid JSON: {exc}") from exc
    if not isinstance(data, dict):
        raise ProblemError("problem file must hold a JSON object")
    return Problem.from_dict(data)


def _dist_doc(F: PiecewiseDist) -> dict:
    doc = F.to_dict()
    try:
        doc["text"] = F.to_text()
    except ValueError:
        pass
    return doc


def _complex_doc(z: complex) -> dict:
    return {"re": z.real, "im": z.imag}


def _emit(args, doc: dict) -> None:
    text = json.dumps(doc, indent=2)
    if args.out:
        Path(args.out).write_text(text + "\n")
    else:
        sys.stdout.write(text + "\n")


def _write_csv(path: str | None, header: Sequence[str], rows) -> None:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerow(header)
    for row in rows:
        writer.writerow([repr(float(v)) if isinstance(v, (float, np.floating)) else v for v in row])
    if path is None or path == "-":
        sys.stdout.write(buf.getvalue())
    else:
        Path(path).write_text(buf.getvalue())


def _need_problem(args) -> Problem:
    if not args.problem:
        raise InputError(f"{args.command} needs --problem PATH")
    problem = load_problem(args.problem)
    if args.window:
        from .odekit import OdeSpec

        ode = OdeSpec(problem.ode.coeffs, problem.ode.rhs, tuple(args.window))
        problem = Problem(ode, problem.interfaces, tuple(args.window), problem.init)
    return problem


def _specs(args) -> list[InterfaceSpec]:
    if args.spec:
        try:
            data = json.loads(Path(args.spec).read_text()) if Path(args.spec).exists() else json.loads(args.spec)
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read interface spec {args.spec!r}: {exc}") from exc
        docs = data if isinstance(data, list) else [data]
        return [InterfaceSpec.from_dict(d) for d in docs]
    return list(_need_problem(args).interfaces)


# ---------------------------------------------------------------------------
# commands


def cmd_star(args) -> int:
    if args.left is None or args.right is None:
        if args.seed is None:
            raise InputError("star needs two distributions (or --seed for a random pair)")
        rng = randfam.rng_for(args.seed)
        F, G = randfam.random_dist(rng), randfam.random_dist(rng)
    else:
        F, G = parse_dist(args.left), parse_dist(args.right)
    _emit(args, {"left": _dist_doc(F), "right": _dist_doc(G), "result": _dist_doc(star(F, G))})
    return EXIT_OK


def cmd_d(args) -> int:
    _emit(args, {"result": _dist_doc(derivative(parse_dist(args.dist), args.k))})
    return EXIT_OK


def cmd_dtilde(args) -> int:
    F = parse_dist(args.dist)
    _emit(args, {"result": _dist_doc(tilde_d(F, args.points, args.k))})
    return EXIT_OK


def cmd_fhat(args) -> int:
    psi = parse_dist(args.dist)
    out = []
    for spec in _specs(args):
        shift = f_hat_shift(spec, psi)
        trace = f_hat_trace(spec, psi)
        out.append({
            "point": spec.point,
            "shift": _dist_doc(shift),
            "trace": _dist_doc(trace),
            "in_kernel": in_kernel(spec, psi, args.tol),
        })
    _emit(args, {"interfaces": out})
    return EXIT_OK


def cmd_ode2(args) -> int:
    problem = _need_problem(args)
    op = build_ode2(problem.ode, problem.interfaces, args.form)
    doc = {"form": args.form}
    if op.a_tilde is not None:
        doc["a_tilde"] = [_dist_doc(a) for a in op.a_tilde]
        doc["b_tilde"] = [_dist_doc(b) for b in op.b_tilde]
    if args.dist:
        doc["residual"] = _dist_doc(apply_ode2(op, parse_dist(args.dist)))
    _emit(args, doc)
    return EXIT_OK


def cmd_solve(args) -> int:
    problem = _need_problem(args)
    if problem.init is None:
        raise ProblemError("missing field 'init'", "init")
    report = solve(problem.ode, problem.interfaces, problem.init, problem.window, tol=args.tol)
    _emit(args, report.to_dict())
    if report.solutions and args.csv:
        rows = [(x.real, v.real, v.imag) for x, v in report.samples(args.samples)]
        _write_csv(args.csv, ("x", "re", "im"), rows)
    if not report.solutions or not report.residual.passed:
        return EXIT_FAIL
    return EXIT_OK


def _load_candidate(args) -> PiecewiseDist:
    if args.dist:
        return parse_dist(args.dist)
    if args.solution:
        try:
            data = json.loads(Path(args.solution).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise InputError(f"cannot read solution {args.solution}: {exc}") from exc
        if isinstance(data, dict) and "solutions" in data:
            if not data["solutions"]:
                raise InputError("solution report holds no solutions")
            data = data["solutions"][args.which]
        return PiecewiseDist.from_dict(data)
    raise InputError("verify needs --dist TEXT or --solution PATH")


def cmd_verify(args) -> int:
    problem = _need_problem(args)
    op = build_ode2(problem.ode, problem.interfaces, args.form)
    check = verify(op, _load_candidate(args), args.tol, problem.window)
    _emit(args, check.to_dict())
    return EXIT_OK if check.passed else EXIT_FAIL


def cmd_pair(args) -> int:
    F = parse_dist(args.dist)
    g = TestFn.bump(args.center, args.radius)
    value = pair(F, g)
    _emit(args, {"value": _complex_doc(value), "test": {"center": args.center, "radius": args.radius}})
    return EXIT_OK


def cmd_mollifier_check(args) -> int:
    F = parse_dist(args.dist)
    g = TestFn.bump(args.center, args.radius)
    limit = pair(delta_shift(args.side, args.order, 0.0, F), g)
    rows = []
    for eps in args.eps:
        value = pair(mollifier_apply(args.side, args.order, eps, F), g)
        rows.append((eps, value, abs(value - limit)))
    errors = [r[2] for r in rows]
    monotone = all(b <= a for a, b in zip(errors, errors[1:]))
    passed = monotone and errors[-1] < args.threshold
    _emit(args, {
        "side": args.side,
        "order": args.order,
        "limit": _complex_doc(limit),
        "rows": [{"eps": e, "value": _complex_doc(v), "error": err} for e, v, err in rows],
        "monotone": monotone,
        "passed": passed,
    })
    if args.csv:
        _write_csv(args.csv, ("eps", "re", "im", "error"), [(e, v.real, v.imag, err) for e, v, err in rows])
    return EXIT_OK if passed else EXIT_FAIL


def cmd_classify(args) -> int:
    out = []
    for spec in _specs(args):
        c = classify(spec)
        out.append({
            "point": spec.point,
            "tag": c.tag,
            "dimension": c.dimension,
            "rank_A": c.rank_a,
            "rank_B": c.rank_b,
            "rank_AB": c.rank_ab,
            "rank_deficient": c.rank_deficient,
        })
    _emit(args, {"interfaces": out})
    return EXIT_OK


# ---------------------------------------------------------------------------
# argument parsing


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--problem", help="problem file (JSON)")
    common.add_argument("--out", help="write the JSON document here instead of stdout")
    common.add_argument("--tol", type=float, default=1e-9, help="verification tolerance (default 1e-9)")
    common.add_argument("--window", type=float, nargs=2, metavar=("A", "B"), help="computational window")
    common.add_argument("--seed", type=int, help="seed for random instances")
    common.add_argument("--form", choices=FORMS, default="tilde", help="ODE2 formulation")

    parser = argparse.ArgumentParser(prog="distode", description=__doc__.splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("star", parents=[common], help="star product of two distributions")
    p.add_argument("left", nargs="?")
    p.add_argument("right", nargs="?")
    p.set_defaults(func=cmd_star)

    p = sub.add_parser("d", parents=[common], help="distributional derivative")
    p.add_argument("dist")
    p.add_argument("-k", type=int, default=1)
    p.set_defaults(func=cmd_d)

    p = sub.add_parser("dtilde", parents=[common], help="modified derivative")
    p.add_argument("dist")
    p.add_argument("-k", type=int, default=1)
    p.add_argument("--points", type=float, nargs="+", default=[0.0])
    p.set_defaults(func=cmd_dtilde)

    p = sub.add_parser("fhat", parents=[common], help="interface operator, both routes")
    p.add_argument("dist")
    p.add_argument("--spec", help="interface spec as JSON text or file")
    p.set_defaults(func=cmd_fhat)

    p = sub.add_parser("ode2", parents=[common], help="assemble ODE2, optionally apply it")
    p.add_argument("--dist", help="candidate to apply the operator to")
    p.set_defaults(func=cmd_ode2)

    p = sub.add_parser("solve", parents=[common], help="solve a problem file")
    p.add_argument("--csv", help="write sampled particular solution (x, re, im); '-' for stdout")
    p.add_argument("--samples", type=int, default=201, help="samples per interval in the CSV")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("verify", parents=[common], help="check a candidate against ODE2")
    p.add_argument("--dist", help="candidate in the DSL")
    p.add_argument("--solution", help="solve report or distribution JSON")
    p.add_argument("--which", type=int, default=0, help="solution index in a report")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("pair", parents=[common], help="pair with a bump test function")
    p.add_argument("dist")
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.set_defaults(func=cmd_pair)

    p = sub.add_parser("mollifier-check", parents=[common], help="mollified vs exact shifting delta")
    p.add_argument("--dist", required=True)
    p.add_argument("--side", choices=("+", "-"), default="+")
    p.add_argument("--order", type=int, default=0)
    p.add_argument("--eps", type=float, nargs="+", default=[1e-1, 1e-2, 1e-3])
    p.add_argument("--center", type=float, default=0.0)
    p.add_argument("--radius", type=float, default=1.0)
    p.add_argument("--threshold", type=float, default=1e-3)
    p.add_argument("--csv", help="write eps, re, im, error rows; '-' for stdout")
    p.set_defaults(func=cmd_mollifier_check)

    p = sub.add_parser("classify", parents=[common], help="classify interface conditions")
    p.add_argument("--spec", help="interface spec as JSON text or file")
    p.set_defaults(func=cmd_classify)
    return parser


def run(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_INPUT if exc.code else EXIT_OK
    try:
        return args.func(args)
    except (InputError, DistodeError) as exc:
        sys.stderr.write(f"error: {exc}\n")
        return EXIT_INPUT


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
