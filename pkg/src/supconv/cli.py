"""Command-line front end.

Subcommands::

    supconv solve PROBLEM.json --out DIR [--fixed-point]
    supconv radial --K 1 --eps 1 --R 1 --family signed_power --theta 1 --oracle tan
    supconv sweep --R 0.1:3:30 --theta 1 --out sweep.csv
    supconv verify --report DIR [--lower DIR] [--checks decay,L1]
    supconv inspect --family log_power --theta 1 --s 1,10,100

Exit codes: 0 success (``solve``: solved; ``verify``: every check
passed), 1 usage or I/O error, 2 nonexistence suspected, 3 not converged,
4 a verification check failed.
"""

from __future__ import annotations

import argparse
import json
import logging
import math
import os
import sys
import time
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path

import numpy as np

from . import __version__
from .errors import SupconvError
from .io import (
    jsonable,
    parse_problem,
    radial_to_csv,
    read_field,
    report_to_json,
    write_field,
    write_json,
)
from .nonlinearity import (
    FAMILIES,
    NonlinearitySpec,
    blowup_integral,
    classify_growth,
    eval_H,
    eval_phi,
    phi_sup,
)
from .radial import (
    Existence,
    RadialProblem,
    analytic_tan,
    analytic_tanh,
    blowup_time,
    existence_verdict,
    solve_radial,
)
from .solver import SolverConfig, Verdict, fixed_point_solve, solve
from .verify import check_comparison, check_decay, check_L1, check_nonexistence_necessary

log = logging.getLogger("supconv")

EXIT_OK, EXIT_USAGE, EXIT_NONEXISTENCE, EXIT_NOT_CONVERGED, EXIT_CHECK_FAILED = 0, 1, 2, 3, 4
VERDICT_EXIT = {
    Verdict.SOLVED: EXIT_OK,
    Verdict.NONEXISTENCE_SUSPECTED: EXIT_NONEXISTENCE,
    Verdict.NOT_CONVERGED: EXIT_NOT_CONVERGED,
}
CHECKS = ("decay", "L1", "comparison", "necessary")


class UsageError(Exception):
    pass


def _fmt(x: float) -> str:
    if x is None:
        return ""
    if math.isinf(x):
        return "inf" if x > 0 else "-inf"
    return f"{x:.17g}"


def _spec_from_args(family: str, theta: float | None) -> NonlinearitySpec:
    family = {"power": "signed_power"}.get(family, family)
    if family == "linear":
        return NonlinearitySpec.linear()
    if family == "tabulated":
        raise UsageError("tabulated nonlinearities are only available through problem files")
    if theta is None:
        raise UsageError(f"--theta is required for family {family}")
    return NonlinearitySpec(family, float(theta))


def parse_range(text: str) -> list[float]:
    """``start:stop:count`` (inclusive linspace), a comma list, or one number."""
    text = text.strip()
    if not text:
        raise UsageError("empty range")
    try:
        if ":" in text:
            parts = text.split(":")
            if len(parts) != 3:
                raise UsageError(f"range {text!r} is not start:stop:count")
            start, stop, count = float(parts[0]), float(parts[1]), int(parts[2])
            if count < 1:
                raise UsageError(f"range {text!r} is empty")
            return [float(v) for v in np.linspace(start, stop, count)]
        values = [float(v) for v in text.split(",") if v.strip()]
    except ValueError as exc:
        raise UsageError(f"cannot parse range {text!r}: {exc}") from None
    if not values:
        raise UsageError("empty range")
    return values


def _thread_count(requested: int | None) -> int:
    cap = os.environ.get("SUPCONV_THREADS")
    n = requested or os.cpu_count() or 1
    if cap:
        try:
            n = min(n, max(1, int(cap)))
        except ValueError:
            raise UsageError(f"SUPCONV_THREADS={cap!r} is not an integer") from None
    return max(1, n)


def _manifest(out_dir: Path, name: str, command: str, source, config: dict,
              outputs: list[Path], verdicts, started: float) -> Path:
    path = out_dir / name
    write_json(path, {
        "command": command,
        "version": __version__,
        "input": None if source is None else str(source),
        "config": config,
        "output_dir": str(out_dir),
        "outputs": sorted(p.name for p in outputs),
        "verdicts": verdicts,
        "timing_seconds": time.perf_counter() - started,
    })
    return path


# -- solve --------------------------------------------------------------------

def _solver_config(args, base: SolverConfig) -> SolverConfig:
    cfg = base.to_dict()
    if args.ladder:
        cfg["ladder"] = parse_range(args.ladder)
    for key in ("tol", "max_iter", "damping", "norm_cap"):
        val = getattr(args, key)
        if val is not None:
            cfg[key] = val
    return SolverConfig(**cfg)


def cmd_solve(args) -> int:
    started = time.perf_counter()
    path = Path(args.problem)
    text = path.read_text(encoding="utf-8")
    problem, base_cfg = parse_problem(text, path.parent)
    cfg = _solver_config(args, base_cfg)
    if args.fixed_point:
        theta = args.theta if args.theta is not None else problem.spec.theta
        report = fixed_point_solve(problem, theta, cfg)
    else:
        report = solve(problem, cfg)
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    body = report_to_json(report)
    body["problem"] = json.loads(text)
    body["problem_base"] = str(path.parent.resolve())
    body["field"] = "field.json"
    outputs = write_field(report.field, out)
    outputs.append(write_json(out / "report.json", body))
    config = {"solver": cfg.to_dict(), "fixed_point": bool(args.fixed_point), "constants": report.constants}
    outputs.append(_manifest(out, "manifest.json", "solve", path, config, outputs,
                             {"solve": report.verdict.value}, started))
    print(f"verdict: {report.verdict.value}")
    if report.cap_fired:
        print(f"cap fired: {report.cap_fired}")
    print(f"levels: {', '.join(_fmt(h.level) for h in report.levels)}")
    print(f"sup norm: {_fmt(float(np.max(np.abs(report.field.values), initial=0.0)))}")
    return VERDICT_EXIT[report.verdict]


# -- radial -------------------------------------------------------------------

def cmd_radial(args) -> int:
    started = time.perf_counter()
    spec = _spec_from_args(args.family, args.theta)
    absorption = args.oracle == "tanh" or args.absorption
    if args.oracle and not (spec.family == "signed_power" and spec.theta == 1.0):
        raise UsageError("closed-form oracles exist only for --family signed_power --theta 1")
    p = RadialProblem(args.K, args.eps, args.R, spec, args.N, absorption)
    verdict = existence_verdict(p, args.tol)
    integral = math.inf if absorption else blowup_integral(spec, args.K, args.eps, args.tol / 10)
    print(f"verdict: {verdict.value}")
    print(f"blowup integral: {_fmt(integral)}")
    summary = {"verdict": verdict.value, "blowup_integral": integral}
    outputs: list[Path] = []
    if verdict is Existence.NOT_EXISTS:
        r_star = blowup_time(spec, args.K, args.eps, args.R, args.tol)
        print(f"blowup radius: {_fmt(r_star)}")
        summary["blowup_radius"] = r_star
    if verdict is Existence.EXISTS:
        sol = solve_radial(p, args.steps, args.tol)
        print(f"central value: {_fmt(sol.a)}")
        summary["central_value"] = sol.a
        exact = None
        if args.oracle:
            fn = analytic_tanh if absorption else analytic_tan
            exact = lambda r: fn(args.K, args.eps, args.R, r)  # noqa: E731
            err = sol.sup_error(exact)
            print(f"sup error: {_fmt(err)}")
            summary["sup_error"] = err
        if args.out:
            out = Path(args.out)
            out.mkdir(parents=True, exist_ok=True)
            csv_path = out / "profile.csv"
            csv_path.write_text(radial_to_csv(sol, exact), encoding="utf-8")
            outputs.append(csv_path)
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        config = {k: getattr(args, k) for k in ("K", "eps", "R", "N", "theta", "steps", "tol", "oracle")}
        config["family"] = spec.family
        config["absorption"] = absorption
        _manifest(out, "manifest.json", "radial", None, config, outputs, summary, started)
    return EXIT_OK


# -- sweep --------------------------------------------------------------------

def _sweep_row(family, theta, K, eps, R, tol):
    spec = _spec_from_args(family, theta)
    integral = blowup_integral(spec, K, eps, tol / 10)
    verdict = existence_verdict(RadialProblem(K, eps, R, spec), tol)
    r_star = R - integral if integral < R else None
    return [spec.family, _fmt(theta) if theta is not None else "", _fmt(K), _fmt(eps), _fmt(R),
            _fmt(integral), verdict.value, _fmt(r_star)]


def cmd_sweep(args) -> int:
    started = time.perf_counter()
    Ks, epss, Rs = parse_range(args.K), parse_range(args.eps), parse_range(args.R)
    thetas = [None] if args.family == "linear" else parse_range(args.theta or "")
    rows_in = [(args.family, t, K, e, R) for t in thetas for K in Ks for e in epss for R in Rs]
    threads = _thread_count(args.threads)
    with ThreadPoolExecutor(max_workers=threads) as pool:
        rows = list(pool.map(lambda a: _sweep_row(*a, args.tol), rows_in))
    header = "family,theta,K,eps,R,blowup_integral,verdict,blowup_radius"
    text = header + "\n" + "".join(",".join(r) + "\n" for r in rows)
    if args.out:
        out = Path(args.out)
        out.parent.mkdir(parents=True, exist_ok=True)
        out.write_text(text, encoding="utf-8")
        config = {"family": args.family, "K": Ks, "eps": epss, "R": Rs, "theta": thetas,
                  "tol": args.tol, "threads": threads}
        counts = {}
        for r in rows:
            counts[r[6]] = counts.get(r[6], 0) + 1
        _manifest(out.parent, out.stem + ".manifest.json", "sweep", None, config, [out], counts, started)
    else:
        sys.stdout.write(text)
    return EXIT_OK


# -- verify -------------------------------------------------------------------

def _load_run(path: Path):
    """Problem and field from a solve output directory or report file."""
    path = Path(path)
    report_path = path / "report.json" if path.is_dir() else path
    body = json.loads(report_path.read_text(encoding="utf-8"))
    problem, _ = parse_problem(json.dumps(body["problem"]), body.get("problem_base", report_path.parent))
    field = read_field(report_path.parent / body.get("field", "field.json"))
    return problem, field


def cmd_verify(args) -> int:
    started = time.perf_counter()
    if bool(args.report) == bool(args.spec):
        raise UsageError("give exactly one of --report or --spec")
    if args.report:
        problem, u = _load_run(args.report)
        source = args.report
    else:
        path = Path(args.spec)
        problem, cfg = parse_problem(path.read_text(encoding="utf-8"), path.parent)
        u = solve(problem, cfg).field
        source = args.spec
    requested = CHECKS if args.checks == "all" else tuple(c.strip() for c in args.checks.split(","))
    unknown = set(requested) - set(CHECKS)
    if unknown:
        raise UsageError(f"unknown checks: {', '.join(sorted(unknown))}")
    explicit = args.checks != "all"
    blocks = []
    skipped = []
    for name in requested:
        if name == "decay":
            rep = check_decay(u, problem.spec, problem.E, problem.f, problem.analysis_dim,
                              problem.M.alpha, problem.sobolev)
        elif name == "L1":
            if problem.mu <= 0:
                if explicit:
                    raise UsageError("the L1 check needs mu > 0")
                skipped.append("L1: mu = 0")
                continue
            rep = check_L1(u, problem.f, problem.mu, args.slack)
        elif name == "comparison":
            if not args.lower:
                if explicit:
                    raise UsageError("the comparison check needs --lower")
                skipped.append("comparison: no --lower run")
                continue
            _, lower = _load_run(args.lower)
            rep = check_comparison(lower, u, args.comparison_tol)
        else:
            theta = args.theta if args.theta is not None else problem.spec.theta
            try:
                rep = check_nonexistence_necessary(problem.f, theta, problem.analysis_dim, problem.mu)
            except SupconvError as exc:
                if explicit:
                    raise
                skipped.append(f"necessary: {exc}")
                continue
        blocks.append((name, rep))
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    outputs = []
    for name, rep in blocks:
        if name == "decay":
            csv_path = out / "decay.csv"
            csv_path.write_text(rep.to_csv(), encoding="utf-8")
            outputs.append(csv_path)
    body = {"checks": [rep.to_dict() for _, rep in blocks], "skipped": skipped}
    outputs.append(write_json(out / "verify.json", body))
    verdicts = {name: bool(rep) for name, rep in blocks}
    _manifest(out, "manifest.json", "verify", source,
              {"checks": list(requested), "slack": args.slack, "comparison_tol": args.comparison_tol},
              outputs, verdicts, started)
    for name, rep in blocks:
        print(f"{name}: {'pass' if rep else 'FAIL'}")
    for s in skipped:
        print(f"skipped {s}")
    return EXIT_OK if all(verdicts.values()) else EXIT_CHECK_FAILED


# -- inspect ------------------------------------------------------------------

def cmd_inspect(args) -> int:
    spec = _spec_from_args(args.family, args.theta)
    growth = classify_growth(spec, args.tol)
    body = {
        "nonlinearity": spec.to_dict(),
        "growth": growth.kind.value,
        "H_limits": [growth.limit_minus, growth.limit_plus],
        "phi_sup": phi_sup(spec, args.tol),
        "blowup_integral": blowup_integral(spec, args.K, args.eps, args.tol),
        "K": args.K,
        "eps": args.eps,
        "points": [
            {"s": s, "h": spec.scalar(s), "H": eval_H(spec, s, args.tol), "phi": eval_phi(spec, s, args.tol)}
            for s in (parse_range(args.s) if args.s else [])
        ],
    }
    print(json.dumps(jsonable(body), indent=2, allow_nan=False))
    return EXIT_OK


# -- entry point ----------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="supconv", description=__doc__.split("\n\n")[0])
    parser.add_argument("--verbose", action="store_true", help="log solver progress to stderr")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("solve", help="solve a problem file")
    p.add_argument("problem", help="problem JSON document")
    p.add_argument("--out", default="supconv-out", help="output directory (default: supconv-out)")
    p.add_argument("--fixed-point", action="store_true", help="use the certified fixed-point scheme")
    p.add_argument("--theta", type=float, help="power for --fixed-point (default: the nonlinearity's)")
    p.add_argument("--ladder", help="truncation levels, e.g. 10,100,1000")
    p.add_argument("--tol", type=float)
    p.add_argument("--max-iter", dest="max_iter", type=int)
    p.add_argument("--damping", type=float)
    p.add_argument("--norm-cap", dest="norm_cap", type=float)
    p.set_defaults(func=cmd_solve)

    p = sub.add_parser("radial", help="radial existence test and profile")
    p.add_argument("--K", type=float, required=True)
    p.add_argument("--eps", type=float, required=True)
    p.add_argument("--R", type=float, required=True)
    p.add_argument("--N", type=int, default=3)
    p.add_argument("--family", default="signed_power", choices=FAMILIES + ("power",))
    p.add_argument("--theta", type=float)
    p.add_argument("--steps", type=int, default=10_000, help="RK4 steps (default: 10000)")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--oracle", choices=("tan", "tanh"))
    p.add_argument("--absorption", action="store_true", help="solve -u' = eps - K h(u)")
    p.add_argument("--out", help="directory for profile.csv and manifest.json")
    p.set_defaults(func=cmd_radial)

    p = sub.add_parser("sweep", help="existence map over parameter ranges")
    p.add_argument("--family", default="signed_power", choices=FAMILIES + ("power",))
    p.add_argument("--theta", help="range for theta")
    p.add_argument("--K", default="1")
    p.add_argument("--eps", default="1")
    p.add_argument("--R", default="1")
    p.add_argument("--tol", type=float, default=1e-10)
    p.add_argument("--threads", type=int, help="worker threads (capped by SUPCONV_THREADS)")
    p.add_argument("--out", help="CSV path (default: stdout)")
    p.set_defaults(func=cmd_sweep)

    p = sub.add_parser("verify", help="a-priori checks on a solved field")
    p.add_argument("--report", help="solve output directory or its report.json")
    p.add_argument("--spec", help="problem JSON to solve first")
    p.add_argument("--checks", default="all", help=f"comma list from {','.join(CHECKS)} (default: all)")
    p.add_argument("--lower", help="solve output with smaller data, for the comparison check")
    p.add_argument("--theta", type=float, help="power for the necessary-condition check")
    p.add_argument("--slack", type=float, help="L1 slack (default: 10 max h)")
    p.add_argument("--comparison-tol", dest="comparison_tol", type=float, default=1e-9)
    p.add_argument("--out", default="supconv-verify")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("inspect", help="transforms of a nonlinearity")
    p.add_argument("--family", required=True, choices=FAMILIES + ("power",))
    p.add_argument("--theta", type=float)
    p.add_argument("--s", help="evaluation points")
    p.add_argument("--K", type=float, default=1.0)
    p.add_argument("--eps", type=float, default=1.0)
    p.add_argument("--tol", type=float, default=1e-10)
    p.set_defaults(func=cmd_inspect)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_USAGE if exc.code else EXIT_OK
    logging.basicConfig(level=logging.INFO if args.verbose else logging.WARNING,
                        format="%(levelname)s %(name)s: %(message)s")
    try:
        return args.func(args)
    except (UsageError, SupconvError, OSError, ValueError, KeyError, json.JSONDecodeError) as exc:
        print(f"supconv {args.command}: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
