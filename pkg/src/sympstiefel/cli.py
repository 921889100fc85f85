"""Batch experiment runner.

Verbs:
    solve    one problem instance, one configuration
    sweep    one instance solved for a grid of metric parameters rho
    compare  one instance solved under configurations differing in one axis
    sympeig  smallest symplectic eigenvalues of an SPD matrix via trace
             minimization, cross-checked against a dense eigensolver oracle

Every run writes per-iteration CSV, a JSON summary and (unless --no-plots)
convergence figures into the output directory. Configuration comes from
flags, optionally seeded by a flat key=value config file; flags win.
"""

from __future__ import annotations

import argparse
import json
import sys
from pathlib import Path

import numpy as np

from . import problems
from .manifold import MetricSpec
from .matkit import rand_gaussian, rand_symplectic
from .mmio import MatrixMarketError, read_matrix_market, write_matrix_market
from .reporting import (
    render_compare_figures,
    render_convergence_figures,
    summarize,
    write_compare_csv,
    write_error_json,
    write_iterations_csv,
    write_summary_json,
    write_sweep_csv,
)
from .retraction import RetractionKind
from .solver import LineSearchConfig, StepRule, StopConfig, solve

__all__ = ["main", "build_parser"]

DEFAULT_RHO_GRID = "0.125,0.25,0.5,1,2,4,8"

# Option value parsers, shared by flags and config files.
_OPTION_TYPES = {
    "problem": str,
    "n": int,
    "p": int,
    "rho": float,
    "variant": str,
    "retraction": str,
    "alpha": float,
    "beta": float,
    "delta": float,
    "step_rule": str,
    "seed": int,
    "input": str,
    "out": str,
    "max_iter": int,
    "eps_grad": float,
    "eps_x": float,
    "eps_f": float,
    "lambda_decay": float,
    "gallery": str,
    "num_samples": int,
    "spread": float,
    "x0_strategy": int,
    "scale": str,
    "rho_grid": str,
    "axis": str,
    "alphas": str,
    "no_plots": lambda v: v.lower() in ("1", "true", "yes"),
}


class CliError(Exception):
    """Configuration or ingestion problem with a user-facing message."""


def _add_common_options(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("--config", help="flat key=value config file; flags override")
    parser.add_argument("--n", type=int, default=10, help="half ambient dimension")
    parser.add_argument("--p", type=int, default=1, help="half column dimension")
    parser.add_argument("--rho", type=float, default=None,
                        help="metric parameter (default: 0.5 for I, 1.0 for II)")
    parser.add_argument("--variant", choices=["I", "II"], default="I")
    parser.add_argument("--retraction", choices=["qgeo", "cayley"], default="cayley")
    parser.add_argument("--alpha", type=float, default=0.85,
                        help="non-monotone averaging weight (0 = Armijo)")
    parser.add_argument("--beta", type=float, default=1e-4)
    parser.add_argument("--delta", type=float, default=0.1)
    parser.add_argument("--step-rule", dest="step_rule", default="ABB",
                        choices=[r.value for r in StepRule])
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("--input", help="MatrixMarket input matrix")
    parser.add_argument("--out", default="sympstiefel-out", help="output directory")
    parser.add_argument("--max-iter", dest="max_iter", type=int, default=1000)
    parser.add_argument("--eps-grad", dest="eps_grad", type=float, default=1e-5)
    parser.add_argument("--eps-x", dest="eps_x", type=float, default=1e-5)
    parser.add_argument("--eps-f", dest="eps_f", type=float, default=1e-8)
    parser.add_argument("--x0-strategy", dest="x0_strategy", type=int,
                        choices=[1, 2, 3], default=2)
    parser.add_argument("--no-plots", dest="no_plots", action="store_true")
    # problem generator knobs
    parser.add_argument("--lambda-decay", dest="lambda_decay", type=float, default=1.01,
                        help="eigenvalue decay of generated SPD matrices")
    parser.add_argument("--gallery", default="lehmer",
                        choices=["lehmer", "wilkinson_sq", "companion_sq", "central_diff"])
    parser.add_argument("--num-samples", dest="num_samples", type=int, default=100)
    parser.add_argument("--spread", type=float, default=0.1)
    parser.add_argument("--scale", default=None,
                        choices=["spectral", "spectral2x", "maxabs", "none"],
                        help="target scaling (default: spectral generated, maxabs ingested)")


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="sympstiefel",
        description="Riemannian gradient descent on the symplectic Stiefel manifold",
    )
    sub = parser.add_subparsers(dest="verb", required=True)

    p_solve = sub.add_parser("solve", help="solve one problem instance")
    p_solve.add_argument("--problem", default="nearest",
                         choices=["nearest", "mean", "brockett", "sympeig"])
    _add_common_options(p_solve)

    p_sweep = sub.add_parser("sweep", help="solve one instance for a grid of rho")
    p_sweep.add_argument("--problem", default="nearest",
                         choices=["nearest", "mean", "brockett", "sympeig"])
    p_sweep.add_argument("--rho-grid", dest="rho_grid", default=DEFAULT_RHO_GRID,
                         help="comma-separated rho values")
    _add_common_options(p_sweep)

    p_cmp = sub.add_parser("compare", help="side-by-side configurations")
    p_cmp.add_argument("--problem", default="nearest",
                       choices=["nearest", "mean", "brockett", "sympeig"])
    p_cmp.add_argument("--axis", default="retraction",
                       choices=["retraction", "variant", "alpha", "step-rule"])
    p_cmp.add_argument("--alphas", default="0,0.85",
                       help="alpha values for --axis alpha")
    _add_common_options(p_cmp)

    p_eig = sub.add_parser("sympeig", help="smallest symplectic eigenvalues")
    _add_common_options(p_eig)
    return parser


def _load_config_file(path: str) -> dict:
    values = {}
    text = Path(path).read_text()
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise CliError(f"{path}:{lineno}: expected 'key = value', got {raw!r}")
        key, _, value = line.partition("=")
        key = key.strip().replace("-", "_")
        value = value.strip()
        if key not in _OPTION_TYPES:
            raise CliError(f"{path}:{lineno}: unknown option {key!r}")
        try:
            values[key] = _OPTION_TYPES[key](value)
        except ValueError as exc:
            raise CliError(f"{path}:{lineno}: bad value for {key}: {exc}") from exc
    return values


def _flag_in_argv(key: str, argv: list[str]) -> bool:
    flag = "--" + key.replace("_", "-")
    return any(tok == flag or tok.startswith(flag + "=") for tok in argv)


def _apply_config_file(parser: argparse.ArgumentParser, argv: list[str]) -> argparse.Namespace:
    args = parser.parse_args(argv)
    if getattr(args, "config", None):
        for key, value in _load_config_file(args.config).items():
            # explicit command-line flags win over config-file values
            if hasattr(args, key) and not _flag_in_argv(key, argv):
                setattr(args, key, value)
    return args


def _config_echo(args: argparse.Namespace) -> dict:
    echo = {}
    for key, value in sorted(vars(args).items()):
        if key in ("config",):
            continue
        echo[key] = value
    return echo


def _seed_children(seed: int, count: int) -> list[np.random.Generator]:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed).spawn(count)]


def _ingest_target(path: str, p: int, scale_mode: str | None) -> np.ndarray:
    try:
        A = read_matrix_market(path)
    except FileNotFoundError as exc:
        raise CliError(f"input file not found: {path}") from exc
    except MatrixMarketError as exc:
        raise CliError(f"cannot parse {path}: {exc}") from exc
    A = problems.scale_target(A, scale_mode or "maxabs")
    if A.shape[1] < 2 * p:
        raise CliError(f"input has {A.shape[1]} columns, need at least {2 * p}")
    A = A[:, : 2 * p]
    if A.shape[0] % 2:
        raise CliError(f"input must have an even number of rows, got {A.shape[0]}")
    return A


def _build_problem(args) -> problems.ProblemDef:
    """Instantiate the requested problem; deterministic in --seed."""
    rng_target, rng_cloud, _ = _seed_children(args.seed, 3)
    kind = getattr(args, "problem", "sympeig")
    if args.verb == "sympeig":
        kind = "sympeig"

    if kind == "nearest":
        if args.input:
            A = _ingest_target(args.input, args.p, args.scale)
            desc = {"source": args.input}
        else:
            A = rand_gaussian(2 * args.n, 2 * args.p, rng_target)
            A = problems.scale_target(A, args.scale or "spectral")
            desc = {"generator": "gaussian", "seed": args.seed}
        return problems.nearest_symplectic(A, descriptor=desc)

    if kind == "mean":
        center = rand_symplectic(args.n, args.p, args.x0_strategy, rng_target)
        samples = problems.sample_cloud(center, args.num_samples, args.spread, rng_cloud)
        return problems.extrinsic_mean(
            samples, descriptor={"generator": "cloud", "seed": args.seed,
                                 "spread": args.spread}
        )

    if kind == "brockett":
        A = problems.spd_with_decay(args.n, args.lambda_decay, rng_target)
        return problems.brockett_trace(
            A, args.p, descriptor={"generator": "spd_with_decay",
                                   "lambda": args.lambda_decay, "seed": args.seed}
        )

    if kind == "sympeig":
        if args.input:
            try:
                M = read_matrix_market(args.input)
            except FileNotFoundError as exc:
                raise CliError(f"input file not found: {args.input}") from exc
            except MatrixMarketError as exc:
                raise CliError(f"cannot parse {args.input}: {exc}") from exc
            desc = {"source": args.input}
        else:
            M = problems.gallery(args.gallery, 2 * args.n)
            desc = {"gallery": args.gallery}
        try:
            return problems.symplectic_eig_smallest(M, args.p, descriptor=desc)
        except ValueError as exc:
            raise CliError(str(exc)) from exc

    raise CliError(f"unknown problem kind {kind!r}")


def _run_one(args, problem, metric: MetricSpec, alpha: float | None = None,
             retraction: str | None = None, step_rule: str | None = None):
    _, _, rng_x0 = _seed_children(args.seed, 3)
    x0 = rand_symplectic(problem.n, problem.p, args.x0_strategy, rng_x0)
    ls = LineSearchConfig(
        beta=args.beta,
        delta=args.delta,
        alpha=args.alpha if alpha is None else alpha,
        step_rule=StepRule(step_rule or args.step_rule),
    )
    stop = StopConfig(eps_grad=args.eps_grad, eps_x=args.eps_x, eps_f=args.eps_f,
                      max_iter=args.max_iter)
    kind = (
        RetractionKind.QUASI_GEODESIC
        if (retraction or args.retraction) == "qgeo"
        else RetractionKind.CAYLEY_LOWRANK
    )
    return solve(problem, x0, metric=metric, retraction=kind, ls=ls, stop=stop)


def _metric_from(args, variant: str | None = None, rho: float | None = None) -> MetricSpec:
    variant = variant or args.variant
    rho = rho if rho is not None else args.rho
    if rho is None:
        return MetricSpec.default(variant)
    return MetricSpec(rho=rho, variant=variant)


def _attach_sympeig_extras(report, problem, args) -> None:
    M = problem.matrix
    d, pairing = problems.extract_eigenvalues(report.X, M)
    report.extras["d_extracted"] = sorted(float(v) for v in d)
    report.extras["d1"] = float(np.min(d))
    report.extras["pairing_residual"] = pairing
    if M.shape[0] <= 1000:
        oracle = problems.symplectic_eig_oracle(M)
        d1_oracle = float(oracle[0])
        report.extras["d_oracle"] = [float(v) for v in oracle[: problem.p]]
        report.extras["d1_oracle"] = d1_oracle
        report.extras["d1_rel_err"] = abs(report.extras["d1"] - d1_oracle) / d1_oracle


def _emit(args, out: Path, stem: str, report, config_echo: dict) -> None:
    write_iterations_csv(out / f"{stem}.csv", report)
    write_summary_json(out / f"{stem}.json", summarize(report, config_echo))
    write_matrix_market(out / f"{stem}_solution.mtx", report.X,
                        comment=f"final iterate of {stem}")
    if not args.no_plots:
        render_convergence_figures(out, stem, report)


def _cmd_solve(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _build_problem(args)
    report = _run_one(args, problem, _metric_from(args))
    if problem.descriptor.get("kind") == "sympeig":
        _attach_sympeig_extras(report, problem, args)
    _emit(args, out, "run", report, _config_echo(args))
    if report.termination.value == "LineSearchFailure":
        write_error_json(out / "error.json", "line search failed to find a step",
                         _config_echo(args))
        return 1
    return 0 if report.termination.converged else 1


def _cmd_sympeig(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _build_problem(args)
    report = _run_one(args, problem, _metric_from(args))
    _attach_sympeig_extras(report, problem, args)
    _emit(args, out, "sympeig", report, _config_echo(args))
    return 0 if report.termination.converged else 1


def _cmd_sweep(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    try:
        grid = [float(tok) for tok in args.rho_grid.split(",") if tok.strip()]
    except ValueError as exc:
        raise CliError(f"bad --rho-grid: {exc}") from exc
    if not grid:
        raise CliError("empty --rho-grid")
    problem = _build_problem(args)
    rows, reports = [], {}
    all_ok = True
    for rho in grid:
        report = _run_one(args, problem, _metric_from(args, rho=rho))
        label = f"rho={rho:g}"
        reports[label] = report
        rows.append(
            {
                "rho": rho,
                "fval": report.final.fval,
                "gradf": report.final.gradf,
                "feasi": report.final.feasi,
                "iter": report.iterations,
                "termination": report.termination.value,
            }
        )
        all_ok = all_ok and report.termination.converged
    write_sweep_csv(out / "sweep.csv", rows)
    summaries = {
        label: summarize(rep, {"rho": rows[i]["rho"], **_config_echo(args)})
        for i, (label, rep) in enumerate(reports.items())
    }
    write_summary_json(out / "sweep.json", summaries)
    if not args.no_plots:
        render_compare_figures(out, "sweep", reports)
    return 0 if all_ok else 1


_COMPARE_AXES = {
    "retraction": lambda args: [("qgeo", {"retraction": "qgeo"}),
                                ("cayley", {"retraction": "cayley"})],
    "variant": lambda args: [("variant-I", {"variant": "I"}),
                             ("variant-II", {"variant": "II"})],
    "step-rule": lambda args: [(r.value, {"step_rule": r.value}) for r in StepRule],
    "alpha": lambda args: [
        (f"alpha={tok.strip()}", {"alpha": float(tok)})
        for tok in args.alphas.split(",") if tok.strip()
    ],
}


def _cmd_compare(args) -> int:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    problem = _build_problem(args)
    reports = {}
    all_ok = True
    for label, overrides in _COMPARE_AXES[args.axis](args):
        metric = _metric_from(args, variant=overrides.get("variant"))
        report = _run_one(
            args, problem, metric,
            alpha=overrides.get("alpha"),
            retraction=overrides.get("retraction"),
            step_rule=overrides.get("step_rule"),
        )
        reports[label] = report
        all_ok = all_ok and report.termination.converged
    write_compare_csv(out / "compare.csv", reports)
    summaries = {label: summarize(rep, _config_echo(args)) for label, rep in reports.items()}
    write_summary_json(out / "compare.json", summaries)
    if not args.no_plots:
        render_compare_figures(out, "compare", reports)
    return 0 if all_ok else 1


def main(argv: list[str] | None = None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    parser = build_parser()
    try:
        args = _apply_config_file(parser, argv)
    except CliError as exc:
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2
    try:
        if args.verb == "solve":
            return _cmd_solve(args)
        if args.verb == "sweep":
            return _cmd_sweep(args)
        if args.verb == "compare":
            return _cmd_compare(args)
        if args.verb == "sympeig":
            return _cmd_sympeig(args)
        raise CliError(f"unknown verb {args.verb!r}")
    except CliError as exc:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        write_error_json(out / "error.json", str(exc))
        print(json.dumps({"error": str(exc)}), file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
