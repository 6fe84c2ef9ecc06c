"""Command line entry point: ``mixsde <subcommand> ...``.

Exit codes: 0 on success, 2 on a configuration or usage error, 1 when a
computation fails (solver overflow, covariance factorization, too many
failed Monte Carlo paths).
"""

from __future__ import annotations

import argparse
import csv
import json
import sys
from pathlib import Path

import numpy as np
from scipy.special import gamma as gamma_fn

from . import experiments as ex
from .fracint import frac_deriv_left, frac_deriv_right, gls_integral, pathwise_bound
from .grid import ConfigError, FactorizationError, GridPath, SolverOverflowError, read_csv, write_csv
from .holder import HolderParams, norm_2alpha, norm_alpha, norm_infalpha, seminorm_0alpha
from .mixed_solver import (CoefficientSet, SolveConfig, euler_solve_mixed, solve_smooth_driver,
                           stop_process, tau_N, validate_coefficients)
from .mollify import build_sequence, mollify, mollify_errors, mollify_rate
from .process_gen import GenConfig, gen_fbm, gen_wiener, holder_constant

EXIT_OK, EXIT_FAILED, EXIT_CONFIG = 0, 1, 2


def _emit(obj) -> None:
    print(json.dumps(obj, sort_keys=True))


def _load_json(arg: str) -> dict:
    """Inline JSON object or a path to a JSON file."""
    text = arg if arg.lstrip().startswith("{") else Path(arg).read_text()
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigError(f"invalid JSON in {arg!r}: {exc}") from None
    if not isinstance(doc, dict):
        raise ConfigError("configuration must be a JSON object")
    return doc


def _params(alpha: float, gamma: float | None):
    return alpha if gamma is None else HolderParams(alpha, gamma)


# ---------------------------------------------------------------------------
# subcommands
# ---------------------------------------------------------------------------

def cmd_paths(args) -> int:
    cfg = GenConfig(args.n, args.T, 0.5 if args.kind == "wiener" else args.H, args.seed)
    path = gen_wiener(cfg) if args.kind == "wiener" else gen_fbm(cfg)
    write_csv(path, args.out)
    return EXIT_OK


NORMS = {
    "alpha": norm_alpha,
    "0alpha": seminorm_0alpha,
    "2alpha": norm_2alpha,
    "infalpha": norm_infalpha,
}


def cmd_norms(args) -> int:
    f = read_csv(args.inp)
    t = f.T if args.t is None else args.t
    _emit({"value": NORMS[args.which](f, _params(args.alpha, args.gamma), t), "which": args.which})
    return EXIT_OK


def cmd_integrate(args) -> int:
    f, g = read_csv(args.f), read_csv(args.g)
    a = f.t0 if args.a is None else args.a
    b = f.T if args.b is None else args.b
    if args.check_bound:
        integral, bound = pathwise_bound(f, g, args.alpha, a, b, gamma=args.gamma)
    else:
        integral, bound = gls_integral(f, g, args.alpha, a, b, gamma=args.gamma), None
    _emit({"integral": integral, "bound": bound, "alpha": args.alpha})
    if bound is not None and abs(integral) > bound:
        print("integral exceeds its pathwise bound", file=sys.stderr)
        return EXIT_FAILED
    return EXIT_OK


def cmd_mollify(args) -> int:
    g = read_csv(args.inp)
    p = _params(args.alpha, args.gamma)
    if args.fit:
        fit = mollify_rate(g, p, args.eps)
        eps, errors = fit.eps, fit.errors
    else:
        eps, errors = args.eps, mollify_errors(g, p, args.eps)
    rows = [("eps", "error")] + [(format(e, ".17g"), format(v, ".17g")) for e, v in zip(eps, errors)]
    if args.out:
        with open(args.out, "w", newline="") as fh:
            csv.writer(fh, lineterminator="\n").writerows(rows)
    else:
        csv.writer(sys.stdout, lineterminator="\n").writerows(rows)
    if args.fit:
        _emit({"slope": fit.slope, "intercept": fit.intercept})
    return EXIT_OK


def cmd_solve(args) -> int:
    cs = CoefficientSet.from_spec(_load_json(args.coeffs))
    cfg = SolveConfig(args.x0, args.n, args.T, seed_w=args.seed_w, seed_z=args.seed_z)
    W = gen_wiener(GenConfig(args.n, args.T, 0.5, args.seed_w))
    Z = gen_fbm(GenConfig(args.n, args.T, args.H, args.seed_z))
    if args.mollify_eps is None:
        X = euler_solve_mixed(cs, cfg, W, Z)
    else:
        X = solve_smooth_driver(cs, cfg, W, mollify(Z, args.mollify_eps))
    write_csv(X, args.out, header=("t", "x"))
    return EXIT_OK


def cmd_experiment(args) -> int:
    run, _ = ex.EXPERIMENTS[args.command]
    cfg = ex.ExperimentConfig.from_dict(_load_json(args.config))
    if args.jobs < 1:
        raise ConfigError(f"--jobs must be >= 1, got {args.jobs}")
    result = run(cfg, jobs=args.jobs)
    out = ex.write_outputs(result, args.out_dir)
    print(f"wrote {out / 'records.csv'}, {out / 'summary.json'}, {out / 'plotdata.csv'}")
    return EXIT_OK


# ---------------------------------------------------------------------------
# selftest: analytic cases with known answers
# ---------------------------------------------------------------------------

def _line(n=2048, T=1.0, func=lambda t: t) -> GridPath:
    return GridPath.from_function(func, n, T)


def _rel(x, y) -> float:
    return abs(x - y) / abs(y)


def _selftest_cases():
    zero, ones, s = _line(func=np.zeros_like), _line(func=np.ones_like), _line()
    s2 = _line(func=lambda t: t * t)
    small = _line(64)
    x = s.times[1:-1]

    def deriv_const():
        return all(np.max(np.abs(frac_deriv_left(ones, a, 0, 1).values[1:-1] * gamma_fn(1 - a) * x**a - 1)) < 1e-3
                   for a in (0.2, 0.3, 0.4))

    def deriv_linear():
        return all(np.max(np.abs(frac_deriv_left(s, a, 0, 1).values[1:-1] * gamma_fn(2 - a) / x ** (1 - a) - 1)) < 1e-3
                   for a in (0.2, 0.3, 0.4))

    def right_linear():
        got = frac_deriv_right(s, 0.4, 1.0).values[1:-1]
        return np.max(np.abs(got / (-2.5 * (1 - x) ** 0.4 / gamma_fn(0.4)) - 1)) < 1e-3

    W = gen_wiener(GenConfig(256, 1.0, 0.5, 3))
    Zw = gen_fbm(GenConfig(256, 1.0, 0.5, 3))
    cs0 = CoefficientSet.from_spec({})
    cs_c1 = CoefficientSet.from_spec({"c": {"kind": "constant", "value": 1.0}})
    Z = gen_fbm(GenConfig(256, 1.0, 0.7, 5))
    return [
        ("wiener starts at 0", lambda: gen_wiener(GenConfig(64, 1, 0.5, 1)).values[0] == 0),
        ("wiener deterministic", lambda: np.array_equal(gen_wiener(GenConfig(64, 1, 0.5, 1)).values,
                                                        gen_wiener(GenConfig(64, 1, 0.5, 1)).values)),
        ("fbm starts at 0", lambda: gen_fbm(GenConfig(64, 1, 0.7, 1)).values[0] == 0),
        ("fbm H=1/2 equals wiener", lambda: np.allclose(Zw.values, W.values, atol=1e-10)),
        ("holder constant of constant", lambda: holder_constant(ones, 0.5) == 0),
        ("holder constant of t, gamma 1/2", lambda: abs(holder_constant(small, 0.5) - 1) < 1e-12),
        ("alpha norm of constant", lambda: abs(norm_alpha(_line(func=lambda t: 0 * t - 2.5), 0.3, 1) - 2.5) < 1e-12),
        ("alpha norm of t", lambda: _rel(norm_alpha(s, 0.3, 1), 1 + 1 / 0.7) < 1e-3),
        ("seminorm of constant", lambda: seminorm_0alpha(ones, 0.4, 1) == 0),
        ("seminorm of t", lambda: _rel(seminorm_0alpha(s, 0.4, 1), 3.5) < 1e-3),
        ("2,alpha norm of 0", lambda: norm_2alpha(zero, 0.3, 1) == 0),
        ("2,alpha norm of 1", lambda: _rel(norm_2alpha(ones, 0.3, 1), 1 / 0.7 + 1 / 0.2) < 1e-3),
        ("inf,alpha norm of constant", lambda: abs(norm_infalpha(ones, 0.3, 1) - 1) < 1e-12),
        ("inf,alpha norm of t at t", lambda: norm_infalpha(s, 0.3, 1) == norm_alpha(s, 0.3, 1)),
        ("left derivative of 1", deriv_const),
        ("left derivative of x-a", deriv_linear),
        ("right derivative of constant", lambda: np.all(frac_deriv_right(ones, 0.4, 1.0).values == 0)),
        ("right derivative of x", right_linear),
        ("integral of 1 dg", lambda: _rel(gls_integral(ones, s2, 0.3, 0, 1, gamma=1.0), 1.0) < 1e-3),
        ("integral of s d(s^2)", lambda: _rel(gls_integral(s, s2, 0.3, 0, 1, gamma=1.0), 2 / 3) < 1e-3),
        ("bound with f = 0", lambda: pathwise_bound(zero, s, 0.3, 0, 1, gamma=1.0) == (0.0, 0.0)),
        ("bound dominates b - a", lambda: (lambda r: _rel(r[0], 1) < 1e-3 and r[1] >= r[0])(
            pathwise_bound(ones, s, 0.3, 0, 1, gamma=1.0))),
        ("mollify 0", lambda: np.all(mollify(zero, 0.125).values == 0)),
        ("mollify t", lambda: np.max(np.abs(mollify(s, 0.125).values[256:] - (s.times[256:] - 0.0625))) < 1e-12),
        ("sequence with n_max 0", lambda: np.array_equal(build_sequence(s, 0.25, 0)[0].values,
                                                         mollify(s, 0.25).values)),
        ("null coefficients pass", lambda: validate_coefficients(cs0, [0, 1], [-1, 1], quadruples=1000).passed),
        ("b = x fails K1 = 1 off [-1, 1]", lambda: not validate_coefficients(
            CoefficientSet.from_spec({"b": {"kind": "linear"}, "K1": 1.0}), [0, 1], [-2, 2],
            quadruples=10)["b_bounded"].passed),
        ("c = 1 telescopes", lambda: np.array_equal(
            euler_solve_mixed(cs_c1, SolveConfig(0.5, 256), W, Z).values,
            np.cumsum(np.concatenate(([0.5], np.diff(Z.values)))))),
        ("null solution is constant", lambda: np.all(euler_solve_mixed(cs0, SolveConfig(0.5, 256), W, Z).values == 0.5)),
        ("smooth driver 0 is constant", lambda: np.all(
            solve_smooth_driver(cs0, SolveConfig(0.5, 256), W, Z.scaled(0.0)).values == 0.5)),
        ("tau for Z = 0", lambda: tau_N(Z.scaled(0.0), 0.4, 1.0) == 1.0),
        ("stop at T", lambda: np.array_equal(stop_process(Z, 1.0).values, Z.values)),
        ("stop at 0", lambda: np.all(stop_process(Z, 0.0).values == 0)),
    ]


def cmd_selftest(args) -> int:
    failed = 0
    for name, check in _selftest_cases():
        try:
            ok = bool(check())
        except Exception as exc:  # report and keep going
            ok = False
            name = f"{name} ({type(exc).__name__}: {exc})"
        failed += not ok
        print(f"{'PASS' if ok else 'FAIL'}  {name}")
    print(f"{failed} failed" if failed else "all passed")
    return EXIT_FAILED if failed else EXIT_OK


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="mixsde", description="Pathwise fractional calculus and mixed SDE experiments.")
    sub = p.add_subparsers(dest="command", required=True, metavar="subcommand")

    q = sub.add_parser("paths", help="sample a Wiener or fBm path to CSV")
    q.add_argument("--kind", choices=("wiener", "fbm"), required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--T", type=float, default=1.0)
    q.add_argument("--H", type=float, default=0.5)
    q.add_argument("--seed", type=int, required=True)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_paths)

    q = sub.add_parser("norms", help="evaluate an alpha-norm of a CSV path")
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--gamma", type=float)
    q.add_argument("--t", type=float, help="end time (default: last grid point)")
    q.add_argument("--which", choices=tuple(NORMS), required=True)
    q.set_defaults(func=cmd_norms)

    q = sub.add_parser("integrate", help="pathwise integral of f against g")
    q.add_argument("--f", required=True)
    q.add_argument("--g", required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--gamma", type=float, help="Hölder exponent of g (estimated if omitted)")
    q.add_argument("--a", type=float)
    q.add_argument("--b", type=float)
    q.add_argument("--check-bound", action="store_true")
    q.set_defaults(func=cmd_integrate)

    q = sub.add_parser("mollify", help="mollification errors and their log-log slope")
    q.add_argument("--in", dest="inp", required=True)
    q.add_argument("--eps", type=float, action="append", required=True)
    q.add_argument("--alpha", type=float, required=True)
    q.add_argument("--gamma", type=float)
    q.add_argument("--fit", action="store_true")
    q.add_argument("--out", help="CSV destination (default: stdout)")
    q.set_defaults(func=cmd_mollify)

    q = sub.add_parser("solve", help="Euler solution of the mixed equation")
    q.add_argument("--coeffs", required=True, help="JSON file or inline JSON object")
    q.add_argument("--x0", type=float, required=True)
    q.add_argument("--n", type=int, required=True)
    q.add_argument("--T", type=float, default=1.0)
    q.add_argument("--H", type=float, required=True)
    q.add_argument("--seed-w", type=int, default=0)
    q.add_argument("--seed-z", type=int, default=1)
    q.add_argument("--mollify-eps", type=float)
    q.add_argument("--out", required=True)
    q.set_defaults(func=cmd_solve)

    for name, text in (("converge", "uniform convergence in probability ensemble"),
                       ("l2diff", "second-moment difference regression"),
                       ("moments", "moment bounds under grid doubling"),
                       ("apriori", "a-priori inequality ratio")):
        q = sub.add_parser(name, help=text)
        q.add_argument("--config", required=True, help="JSON file or inline JSON object")
        q.add_argument("--out-dir", required=True)
        q.add_argument("--jobs", type=int, default=1, help="worker processes (default: sequential)")
        q.set_defaults(func=cmd_experiment)

    q = sub.add_parser("selftest", help="run the analytic example suite")
    q.set_defaults(func=cmd_selftest)
    return p


def run(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_CONFIG
    try:
        return args.func(args)
    except (ConfigError, FileNotFoundError, IsADirectoryError) as exc:
        print(f"configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except (SolverOverflowError, FactorizationError, ex.ExperimentError, FloatingPointError) as exc:
        print(f"computation failed: {exc}", file=sys.stderr)
        return EXIT_FAILED


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
