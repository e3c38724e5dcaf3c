"""Command-line front end: solve, rate-table, beta-sweep, certify, validate."""

from __future__ import annotations

import argparse
import json
import sys

import numpy as np

from . import builtins as _builtins
from . import engine, infeasibility, oracle, rates
from .operators import optimal_beta
from .problem import load_problem_file, save_problem, validate

EXIT_OK = 0
EXIT_BAD_SPEC = 1
EXIT_INFEASIBLE = 2
EXIT_ITER_LIMIT = 3


class SpecError(Exception):
    pass


def _parse_csv_floats(text, name):
    try:
        return np.array([float(x) for x in text.split(",") if x.strip() != ""])
    except ValueError as exc:
        raise SpecError(f"could not parse --{name} {text!r}: {exc}") from exc


def _load_spec_problem(args):
    if getattr(args, "builtin", None) and getattr(args, "file", None):
        raise SpecError("give either --builtin or --file, not both")
    if getattr(args, "builtin", None):
        return _builtins.make_builtin(args.builtin, kappa1=args.kappa1,
                                      kappa2=args.kappa2, q1=args.q1)
    if getattr(args, "file", None):
        return load_problem_file(args.file)
    raise SpecError("a problem source is required (--builtin or --file)")


def _solve_options(args, **overrides):
    beta = args.beta
    if beta != "auto":
        try:
            beta = float(beta)
        except ValueError as exc:
            raise SpecError(f"--beta must be a number or 'auto', got {beta!r}") from exc
    kw = dict(beta=beta, eps_o=args.eps_o, eps_r=args.eps_r, eps_a=args.eps_a,
              eps_v=args.eps_v, max_iter=args.max_iter)
    kw.update(overrides)
    return engine.SolveOptions(**kw)


def _initial_iterates(args, n):
    w0 = lam0 = None
    if args.w0:
        w0 = _parse_csv_floats(args.w0, "w0")
        if w0.size != n:
            raise SpecError(f"--w0 has {w0.size} entries, expected {n}")
    if args.lambda0:
        lam0 = _parse_csv_floats(args.lambda0, "lambda0")
        if lam0.size != n:
            raise SpecError(f"--lambda0 has {lam0.size} entries, expected {n}")
    return w0, lam0


def _emit(text, path):
    if path:
        with open(path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def _result_doc(result):
    doc = {"status": result.status.value, "iterations": result.iterations,
           "beta": result.beta, "kkt": None, "certificate": None}
    if result.kkt is not None:
        doc["kkt"] = {
            "y_star": result.kkt.y_star.tolist(),
            "xi_star": result.kkt.xi_star.tolist(),
            "lambda_star": result.kkt.lambda_star.tolist(),
        }
    if result.certificate is not None:
        doc["certificate"] = infeasibility.certificate_to_dict(result.certificate)
    return doc


def cmd_validate(args):
    problem = _load_spec_problem(args)
    report = validate(problem)
    doc = {"ok": report.ok, "checks": report.checks, "details": report.details}
    _emit(json.dumps(doc, indent=2, default=str) + "\n", args.out)
    return EXIT_OK if report.ok else EXIT_BAD_SPEC


def cmd_solve(args):
    problem = _load_spec_problem(args)
    options = _solve_options(args)
    w0, lam0 = _initial_iterates(args, problem.n)
    result = engine.solve(problem, options, w0=w0, lam0=lam0)
    if args.trace:
        engine.write_trace_csv(result.trace, args.trace)
    _emit(json.dumps(_result_doc(result), indent=2) + "\n", args.out)
    if result.status == engine.Status.OPTIMAL:
        return EXIT_OK
    if result.status == engine.Status.INFEASIBLE:
        return EXIT_INFEASIBLE
    return EXIT_ITER_LIMIT


def cmd_rate_table(args):
    mz = _parse_csv_floats(args.mz, "mz") if args.mz else np.array(rates.TABLE_GRID)
    values = _parse_csv_floats(args.values, "values") if args.values \
        else np.array(rates.TABLE_GRID)
    if np.any(mz < 0) or np.any(mz >= 1):
        raise SpecError("--mz entries must lie in [0, 1)")
    if np.any(values < 0) or np.any(values > 1):
        raise SpecError("--values entries must lie in [0, 1]")
    table = rates.rate_table(mz, values, mode=args.mode)
    _emit(rates.format_rate_table(table, mz, values, mode=args.mode), args.out)
    return EXIT_OK


def _iterations_to_subset(trace):
    # First iteration after which the detected active set stays inside the
    # reference one; -1 when that never happens.
    last_bad = 0
    seen = False
    for row in trace:
        if row.active_subset is None:
            return -1
        seen = True
        if not row.active_subset:
            last_bad = row.k
    if not seen:
        return -1
    first = last_bad + 1
    return first if first <= trace[-1].k else -1


def cmd_beta_sweep(args):
    problem = _load_spec_problem(args)
    if args.betas is not None:
        betas = _parse_csv_floats(args.betas, "betas")
    else:
        betas = np.logspace(np.log10(args.beta_min), np.log10(args.beta_max), args.beta_num)
    if betas.size == 0:
        raise SpecError("beta sweep grid is empty")
    if np.any(betas <= 0):
        raise SpecError("beta values must be positive")

    ref = oracle.oracle_solve(problem)
    if ref.status != oracle.OPTIMAL:
        raise SpecError("beta sweep needs a feasible problem with an oracle reference")
    w0, lam0 = _initial_iterates(args, problem.n)
    beta_star = optimal_beta(problem)

    lines = [f"# beta_star = {float(beta_star)!r}",
             "beta,iterations,iterations_to_subset,status,is_optimal_beta"]
    nearest = int(np.argmin(np.abs(np.log(betas / beta_star))))
    for idx, beta in enumerate(betas):
        options = _solve_options(args, beta=float(beta))
        result = engine.solve(problem, options, w0=w0, lam0=lam0, reference=ref.kkt)
        k_subset = _iterations_to_subset(result.trace)
        lines.append(f"{float(beta)!r},{result.iterations},{k_subset},"
                     f"{result.status.value},{int(idx == nearest)}")
    _emit("\n".join(lines) + "\n", args.out)
    return EXIT_OK


def cmd_certify(args):
    problem = _load_spec_problem(args)
    y_circ, w_circ, distance = infeasibility.infeasibility_minimizer(problem)
    doc = {"distance": distance, "feasible": distance <= oracle.FEASIBLE_GAP_TOL}
    if doc["feasible"]:
        doc["verdict"] = "feasible"
        _emit(json.dumps(doc, indent=2) + "\n", args.out)
        return EXIT_OK

    doc["verdict"] = "infeasible"
    options = _solve_options(args)
    w0, lam0 = _initial_iterates(args, problem.n)
    result = engine.solve(problem, options, w0=w0, lam0=lam0)
    if args.trace:
        engine.write_trace_csv(result.trace, args.trace)
    cert = result.certificate
    if cert is None:
        cert = infeasibility.build_certificate(problem, result.trace)
    report = infeasibility.verify_limit(result, cert, problem, eps_a=args.eps_a)
    doc["certificate"] = infeasibility.certificate_to_dict(cert)
    doc["verification"] = {"ok": report.ok, "misuse": report.misuse,
                           "checks": report.checks, "values": report.values}
    doc["solver_status"] = result.status.value
    doc["iterations"] = result.iterations
    _emit(json.dumps(doc, indent=2) + "\n", args.out)
    return EXIT_INFEASIBLE


def _add_problem_args(p):
    p.add_argument("--builtin", choices=_builtins.BUILTIN_NAMES)
    p.add_argument("--file", help="path to a JSON problem document")
    p.add_argument("--kappa1", type=float, default=1.0)
    p.add_argument("--kappa2", type=float, default=1.0)
    p.add_argument("--q1", type=float, default=0.0)


def _add_solver_args(p):
    p.add_argument("--beta", default="auto", help="penalty value or 'auto'")
    p.add_argument("--lambda0", help="comma-separated initial multiplier")
    p.add_argument("--w0", help="comma-separated initial box iterate")
    p.add_argument("--max-iter", type=int, default=100_000, dest="max_iter")
    p.add_argument("--eps-o", type=float, default=1e-6, dest="eps_o")
    p.add_argument("--eps-r", type=float, default=1e-3, dest="eps_r")
    p.add_argument("--eps-a", type=float, default=1e-3, dest="eps_a")
    p.add_argument("--eps-v", type=float, default=1e-4, dest="eps_v")
    p.add_argument("--trace", help="write the iteration trace CSV here")


def build_parser():
    parser = argparse.ArgumentParser(prog="admmqp",
                                     description="Dense splitting-based QP solver "
                                                 "with rate certificates")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("validate", help="check structural assumptions")
    _add_problem_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_validate)

    p = sub.add_parser("solve", help="solve a problem")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("rate-table", help="tabulate worst-case contraction factors")
    p.add_argument("--mode", choices=("cF", "alpha"), default="cF")
    p.add_argument("--mz", help="comma-separated MZ-norm grid")
    p.add_argument("--values", help="comma-separated row-value grid")
    p.add_argument("--out")
    p.set_defaults(func=cmd_rate_table)

    p = sub.add_parser("beta-sweep", help="iterations vs penalty over a grid")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--betas", help="explicit comma-separated penalty grid")
    p.add_argument("--beta-min", type=float, default=0.01, dest="beta_min")
    p.add_argument("--beta-max", type=float, default=100.0, dest="beta_max")
    p.add_argument("--beta-num", type=int, default=25, dest="beta_num")
    p.add_argument("--out")
    p.set_defaults(func=cmd_beta_sweep)

    p = sub.add_parser("certify", help="compute and verify an infeasibility certificate")
    _add_problem_args(p)
    _add_solver_args(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_certify)

    p = sub.add_parser("dump", help="print the canonical document of a builtin")
    _add_problem_args(p)
    p.add_argument("--out")
    p.set_defaults(func=lambda a: (_emit(save_problem(_load_spec_problem(a)) + "\n", a.out),
                                   EXIT_OK)[1])
    return parser


def main(argv=None):
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on bad arguments; 2 is reserved for infeasibility.
        code = exc.code if isinstance(exc.code, int) else 1
        return EXIT_OK if code == 0 else EXIT_BAD_SPEC
    try:
        return args.func(args)
    except (SpecError, ValueError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_BAD_SPEC


if __name__ == "__main__":
    sys.exit(main())
