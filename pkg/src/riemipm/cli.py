"""Command-line experiment runner.

Subcommands::

    solve   run ripm or riptrm on a built-in or file-defined problem
    check   finite-difference and regularity checks for a problem
    rate    order and Theta-law analysis of an existing trace file
    suite   run every acceptance property and write the solver traces

Exit status is 0 on success, 1 when a solver or check fails and 2 on a
configuration error.
"""
from __future__ import annotations

import argparse
import json
import math
import sys
from pathlib import Path

import numpy as np

from .diagnostics import fd_validate, regularity_check
from .exceptions import NotApproximatelyKKT
from .problem import BUILTIN_NAMES, PrimalDualPoint, builtin_problem, load_problem
from .ripm import BarrierSchedule, ForcingFunctions, OuterConfig, outer_solve
from .riptrm import TrustRegionSettings, riptrm_solve
from .tracefile import format_trace, rate_summary, read_trace, summarize

EXIT_OK = 0
EXIT_FAILURE = 1
EXIT_CONFIG = 2


class ConfigError(ValueError):
    pass


def _jsonable(obj):
    if isinstance(obj, float) and not math.isfinite(obj):
        return None
    if isinstance(obj, dict):
        return {k: _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return _jsonable(obj.item())
    return obj


def _emit_summary(summary: dict, path) -> None:
    text = json.dumps(_jsonable(summary), indent=2, sort_keys=True) + "\n"
    if path:
        Path(path).write_text(text)
    else:
        sys.stdout.write(text)


def resolve_problem(spec: str):
    """Built-in name or path to a JSON problem file; returns ``(problem, reference or None)``."""
    if spec in BUILTIN_NAMES:
        return builtin_problem(spec)
    path = Path(spec)
    if not path.is_file():
        raise ConfigError(f"unknown problem {spec!r}: not one of {', '.join(BUILTIN_NAMES)} and not a file")
    prob = load_problem(path)
    return prob, prob.reference


def build_config(args) -> tuple[OuterConfig, TrustRegionSettings]:
    schedule = BarrierSchedule(mu0=args.mu0, kappa=args.kappa, theta=args.theta)
    forcing = ForcingFunctions(c_grad=args.c_grad, c_compl=args.c_compl, c_eq=args.c_eq, c_sosp=args.c_sosp)
    config = OuterConfig(
        schedule=schedule, forcing=forcing, max_outer=args.max_outer, kkt_stop_tol=args.kkt_tol,
        condition_cap=args.condition_cap, tau=args.tau, inner_max=args.inner_max,
    )
    region = TrustRegionSettings(delta_max=args.delta_max, delta_init=args.delta_init, delta_min_init=args.delta_min_init)
    return config, region


def _start_point(problem, seed: int):
    if problem.initial is not None:
        return problem.initial
    rng = np.random.default_rng(seed)
    return PrimalDualPoint(problem.sample_interior(rng), np.ones(problem.m), np.zeros(problem.p))


def cmd_solve(args) -> int:
    prob, ref = resolve_problem(args.problem)
    config, region = build_config(args)
    w0 = _start_point(prob, args.seed)
    if args.algorithm == "riptrm":
        if prob.p:
            raise ConfigError("riptrm handles inequality-only problems; this problem has equality constraints")
        report = riptrm_solve(prob, w0, config, region, reference=ref)
    else:
        report = outer_solve(prob, w0, config, reference=ref)
    text = format_trace(report, args.algorithm)
    if args.trace:
        Path(args.trace).write_text(text)
    summary = summarize(prob, report, args.algorithm)
    _emit_summary(summary, args.summary)
    return EXIT_OK if report.converged else EXIT_FAILURE


def cmd_check(args) -> int:
    prob, ref = resolve_problem(args.problem)
    fd = fd_validate(prob, samples=args.samples, seed=args.seed)
    out: dict = {
        "problem": prob.name,
        "fd": {"grad_rel_err": fd.grad_error, "jacobian_rel_err": fd.jacobian_error, "passed": fd.passed},
    }
    ok = fd.passed
    if ref is None:
        out["regularity"] = None
    else:
        try:
            reg = regularity_check(prob, ref.point, tol=args.tol)
        except NotApproximatelyKKT as exc:
            out["regularity"] = {"error": str(exc)}
            ok = False
        else:
            out["regularity"] = {
                "licq": {"passed": reg.licq.passed, "sigma_min": reg.licq.sigma_min},
                "sc": {"passed": reg.sc.passed, "margin": reg.sc.margin},
                "sosc": {"status": reg.sosc.status, "min_rayleigh": reg.sosc.min_rayleigh},
                "active": list(reg.active),
                "passed": reg.passed,
            }
            ok &= reg.passed
    out["passed"] = bool(ok)
    _emit_summary(out, args.summary)
    return EXIT_OK if ok else EXIT_FAILURE


def cmd_rate(args) -> int:
    try:
        cols = read_trace(args.trace)
    except (OSError, ValueError, IndexError) as exc:
        raise ConfigError(f"cannot read trace: {exc}") from None
    out = {"trace": str(args.trace), "rows": int(cols["k"].size)}
    out.update(rate_summary(cols["err_to_ref"], cols["mu"]))
    _emit_summary(out, args.summary)
    return EXIT_OK if out["fitted_order"] is not None else EXIT_FAILURE


def cmd_suite(args) -> int:
    from .validation import run_all, run_rate_suite

    runs = run_rate_suite(args.jobs)
    results = run_all(seed=args.seed, jobs=args.jobs, runs=runs)
    out_dir = Path(args.out_dir) if args.out_dir else None
    if out_dir is not None:
        out_dir.mkdir(parents=True, exist_ok=True)
        for rec in runs:
            (out_dir / f"trace_{rec.algorithm}_{rec.problem}.csv").write_text(format_trace(rec.report, rec.algorithm))
    for r in results:
        print(r.line())
    summary = {
        "criteria": [
            {"number": r.number, "name": r.name, "passed": r.passed, "measured": r.measured} for r in results
        ],
        "passed": all(r.passed for r in results),
    }
    path = args.summary or (out_dir / "summary.json" if out_dir is not None else None)
    if path is not None:
        _emit_summary(summary, path)
    return EXIT_OK if summary["passed"] else EXIT_FAILURE


def _add_problem(p):
    p.add_argument("--problem", required=True, help=f"built-in name ({', '.join(BUILTIN_NAMES)}) or JSON problem file")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="riemipm", description="Riemannian interior point experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    s = sub.add_parser("solve", help="solve a problem and write a trace")
    _add_problem(s)
    s.add_argument("--algorithm", choices=("ripm", "riptrm"), default="ripm")
    s.add_argument("--mu0", type=float, default=0.1)
    s.add_argument("--kappa", type=float, default=0.5)
    s.add_argument("--theta", type=float, default=0.9)
    s.add_argument("--c-grad", type=float, default=1.0)
    s.add_argument("--c-compl", type=float, default=1.0)
    s.add_argument("--c-eq", type=float, default=1.0)
    s.add_argument("--c-sosp", type=float, default=1.0)
    s.add_argument("--kkt-tol", type=float, default=1e-10)
    s.add_argument("--max-outer", type=int, default=50)
    s.add_argument("--inner-max", type=int, default=100)
    s.add_argument("--tau", type=float, default=0.995)
    s.add_argument("--condition-cap", type=float, default=1e12)
    s.add_argument("--delta-max", type=float, default=10.0)
    s.add_argument("--delta-init", type=float, default=1.0)
    s.add_argument("--delta-min-init", type=float, default=0.1)
    s.add_argument("--seed", type=int, default=0, help="seeds the start point when the problem has none")
    s.add_argument("--trace", help="trace CSV output path")
    s.add_argument("--summary", help="summary JSON output path (stdout if omitted)")
    s.set_defaults(func=cmd_solve)

    c = sub.add_parser("check", help="finite-difference and regularity checks")
    _add_problem(c)
    c.add_argument("--samples", type=int, default=20)
    c.add_argument("--seed", type=int, default=0)
    c.add_argument("--tol", type=float, default=1e-6)
    c.add_argument("--summary")
    c.set_defaults(func=cmd_check)

    r = sub.add_parser("rate", help="order analysis of an existing trace")
    r.add_argument("--trace", required=True)
    r.add_argument("--summary")
    r.set_defaults(func=cmd_rate)

    u = sub.add_parser("suite", help="run every acceptance property")
    u.add_argument("--seed", type=int, default=0)
    u.add_argument("--jobs", type=int, default=1)
    u.add_argument("--out-dir")
    u.add_argument("--summary")
    u.set_defaults(func=cmd_suite)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (ConfigError, ValueError) as exc:
        print(f"riemipm: configuration error: {exc}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
