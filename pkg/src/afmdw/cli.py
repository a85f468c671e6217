"""Experiment command line.

Subcommands:
  run       execute one configured run; write trace.csv, summary.txt, charts
  sweep     grid of runs; per-cell subdirectories plus combined chart/slopes
  simulate  integrate the matching differential inclusion; write dipath.csv
  diagnose  run plus a plain-text report of every checkable quantity
  accept    execute the acceptance suite and print its pass/fail table

Exit codes: 0 ok, 2 config error, 3 assertion/bound violation, 4 I/O error.
Output directories are created on demand; existing output files are refused
unless --force is given, which also downgrades strict validation to warnings.
"""

from __future__ import annotations

import argparse
import csv
import itertools
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from . import acceptance, inclusion, svgchart
from ._backend import BACKEND_NAME
from .core import RunConfig, config_echo, load_config, replace
from .diagnostics import loglog_slope, shadow_identity_ulps, write_trace_csv
from .engine import RunResult, run
from .errors import AfmdwError, ConfigError, ConfigViolation, DegenerateFit, OutputExists
from .estimators import v0_default
from .problems import make_problem

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_VIOLATION = 3
EXIT_IO = 4


def _ensure_outdir(out: str, files: list[str], force: bool) -> None:
    os.makedirs(out, exist_ok=True)
    if force:
        return
    for name in files:
        target = os.path.join(out, name)
        if os.path.exists(target):
            raise OutputExists(f"{target} exists; pass --force to overwrite")


def _load(args) -> RunConfig:
    overrides = list(args.set or [])
    cfg = load_config(args.config, overrides)
    if getattr(args, "seed", None) is not None:
        cfg = replace(cfg, seed=args.seed)
    if args.force and cfg.strict:
        cfg = replace(cfg, strict=False)
    return cfg


def _slope_or_nan(res: RunResult) -> float:
    try:
        return loglog_slope(res.trace.residual, 0.3, k=res.trace.k)
    except DegenerateFit:
        return math.nan


def _write_run_outputs(res: RunResult, out: str) -> None:
    trace = res.trace
    write_trace_csv(trace, os.path.join(out, "trace.csv"))

    series = [svgchart.Series("residual", trace.k, trace.residual)]
    if np.any(np.isfinite(trace.bound)):
        series.append(svgchart.Series("bound", trace.k, trace.bound))
    svgchart.line_chart(
        series,
        os.path.join(out, "residual.svg"),
        title="residual ||sigma x + m||",
        xlabel="iteration",
        ylabel="residual",
        loglog=True,
    )
    svgchart.line_chart(
        [svgchart.Series("objective", trace.k, trace.objective)],
        os.path.join(out, "objective.svg"),
        title="regularized objective",
        xlabel="iteration",
        ylabel="objective",
    )

    if res.config.diagnostics.record_history:
        _write_history_csv(res, os.path.join(out, "history.csv"))

    with open(os.path.join(out, "summary.txt"), "w", encoding="utf-8") as fh:
        fh.write(_summary_text(res))


def _write_history_csv(res: RunResult, path: str) -> None:
    h = res.histories
    n = h.x.shape[1]
    cols = ["k"]
    for name in ("x", "m", "v"):
        cols.extend(f"{name}{j}" for j in range(n))
    cols.extend(f"g{j}" for j in range(n))
    cols.append("idx")
    K = h.g.shape[0]
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(cols)
        for k in range(K + 1):
            row = [str(k)]
            for arr in (h.x, h.m, h.v):
                row.extend(f"{t:.17g}" for t in arr[k])
            if k < K:
                row.extend(f"{t:.17g}" for t in h.g[k])
                row.append(str(int(h.idx[k])))
            else:
                row.extend("nan" for _ in range(n))
                row.append("")
            w.writerow(row)


def _summary_text(res: RunResult) -> str:
    trace = res.trace
    lines = []
    lines.append("# configuration")
    lines.append(config_echo(res.config).rstrip("\n"))
    lines.append("")
    lines.append("# validation")
    lines.append(res.report.summary())
    lines.append("")
    lines.append("# run")
    lines.append(f"backend = {res.backend}")
    lines.append(f"wall_time_s = {res.wall_time_s:.3f}")
    lines.append(f"final_objective = {trace.objective[-1]:.17g}")
    lines.append(f"final_residual = {trace.residual[-1]:.17g}")
    slope = _slope_or_nan(res)
    lines.append(f"residual_tail_slope = {slope:.6g}")
    lines.append(f"bound_violations = {trace.bound_violations()}")
    lines.append(f"sup_x_norm = {res.sup_x_norm:.17g}")
    lines.append(f"growth_bound_q = {res.q_bound:.17g}")
    gaps = trace.stat_gap[np.isfinite(trace.stat_gap)]
    if gaps.size:
        lines.append(f"final_stat_gap = {gaps[-1]:.17g}")
    return "\n".join(lines) + "\n"


def cmd_run(args) -> int:
    cfg = _load(args)
    files = ["trace.csv", "summary.txt", "residual.svg", "objective.svg"]
    if cfg.diagnostics.record_history:
        files.append("history.csv")
    _ensure_outdir(args.out, files, args.force)
    res = run(cfg, force_generic=args.generic)
    _write_run_outputs(res, args.out)
    violations = res.trace.bound_violations()
    if violations and cfg.strict:
        print(f"error: residual exceeded its bound on {violations} rows", file=sys.stderr)
        return EXIT_VIOLATION
    print(f"run done: {args.out}/trace.csv ({len(res.trace)} rows, backend {res.backend})")
    return EXIT_OK


def _parse_grid(specs: list[str]) -> list[tuple[str, list[str]]]:
    grid = []
    for spec in specs:
        if "=" not in spec:
            raise ConfigError(f"grid spec {spec!r} must look like section.key=v1|v2|...")
        key, rest = spec.split("=", 1)
        key = key.strip()
        if "." not in key:
            raise ConfigError(f"grid key {key!r} must look like section.key")
        values = [v.strip() for v in rest.split("|") if v.strip() != ""]
        grid.append((key, values))
    return grid


def _cell_name(assignment: list[tuple[str, str]]) -> str:
    parts = []
    for key, value in assignment:
        short = key.split(".", 1)[1]
        safe = "".join(ch if (ch.isalnum() or ch in "._+-") else "-" for ch in value)
        parts.append(f"{short}={safe}")
    return "_".join(parts)


def cmd_sweep(args) -> int:
    grid = _parse_grid(args.grid or [])
    if not grid or any(len(values) == 0 for values in grid):
        print("warning: empty sweep grid, nothing to run", file=sys.stderr)
        return EXIT_OK

    cells = []
    for combo in itertools.product(*[vals for _, vals in grid]):
        assignment = list(zip([k for k, _ in grid], combo))
        cells.append((_cell_name(assignment), assignment))

    _ensure_outdir(args.out, ["residuals.svg", "slopes.csv"], args.force)

    def run_cell(assignment):
        overrides = list(args.set or []) + [f"{k}={v}" for k, v in assignment]
        cfg = load_config(args.config, overrides)
        if getattr(args, "seed", None) is not None:
            cfg = replace(cfg, seed=args.seed)
        if args.force and cfg.strict:
            cfg = replace(cfg, strict=False)
        return run(cfg)

    results: list[tuple[str, RunResult | None, str]] = []
    with ThreadPoolExecutor(max_workers=max(1, args.jobs)) as pool:
        futures = [(name, pool.submit(run_cell, assignment)) for name, assignment in cells]
    for name, fut in futures:
        try:
            results.append((name, fut.result(), ""))
        except AfmdwError as e:
            results.append((name, None, f"{type(e).__name__}: {e}"))

    series = []
    rows = []
    failed = 0
    for name, res, err in results:
        if res is None:
            failed += 1
            rows.append([name, "nan", "nan", "", "failed: " + err])
            print(f"cell {name}: FAILED ({err})", file=sys.stderr)
            continue
        cell_dir = os.path.join(args.out, name)
        _ensure_outdir(cell_dir, ["trace.csv"], args.force)
        _write_run_outputs(res, cell_dir)
        slope = _slope_or_nan(res)
        series.append(svgchart.Series(name, res.trace.k, res.trace.residual))
        rows.append(
            [
                name,
                f"{slope:.17g}",
                f"{res.trace.residual[-1]:.17g}",
                str(res.trace.bound_violations()),
                "ok",
            ]
        )

    if series:
        svgchart.line_chart(
            series,
            os.path.join(args.out, "residuals.svg"),
            title="residual decay across the sweep",
            xlabel="iteration",
            ylabel="residual",
            loglog=True,
        )
    with open(os.path.join(args.out, "slopes.csv"), "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(["cell", "tail_slope", "final_residual", "bound_violations", "status"])
        w.writerows(rows)

    print(f"sweep done: {len(cells) - failed}/{len(cells)} cells ok, outputs in {args.out}")
    return EXIT_OK if failed == 0 else EXIT_VIOLATION


def cmd_simulate(args) -> int:
    cfg = _load(args)
    _ensure_outdir(args.out, ["dipath.csv", "path.svg"], args.force)
    problem = make_problem(cfg.problem_id, dict(cfg.problem_params))
    rng = np.random.default_rng(cfg.seed)
    if cfg.x0 is not None:
        start = np.asarray(cfg.x0, dtype=np.float64)
    else:
        start = cfg.x0_scale * rng.uniform(-1.0, 1.0, size=problem.dim)

    if cfg.stepper == "st":
        m0 = np.asarray(cfg.m0, dtype=np.float64) if cfg.m0 is not None else np.zeros(problem.dim)
        v0 = v0_default(cfg.scheme, problem.dim)
        path = inclusion.integrate_di_st(
            problem, start, m0, v0, cfg.sigma, cfg.tau1, cfg.tau2,
            cfg.scheme.epsilon, args.dt, args.t_end,
        )
    else:
        path = inclusion.integrate_di_sgd(problem, start, cfg.sigma, args.dt, args.t_end)

    inclusion.write_dipath_csv(path, os.path.join(args.out, "dipath.csv"))
    series = [
        svgchart.Series(f"coord {j}", path.times, path.values[:, j])
        for j in range(path.values.shape[1])
    ]
    if path.objective is not None:
        series.append(svgchart.Series("objective", path.times, path.objective))
    svgchart.line_chart(
        series,
        os.path.join(args.out, "path.svg"),
        title=f"{path.mode} trajectory (dt = {path.dt:g})",
        xlabel="t",
        ylabel="state",
    )
    print(f"simulate done: {args.out}/dipath.csv ({path.times.shape[0]} knots, mode {path.mode})")
    return EXIT_OK


def cmd_diagnose(args) -> int:
    cfg = _load(args)
    _ensure_outdir(args.out, ["trace.csv", "diagnose.txt"], args.force)
    res = run(cfg)
    write_trace_csv(res.trace, os.path.join(args.out, "trace.csv"))

    h = res.histories
    ulps = shadow_identity_ulps(h.m, h.g, h.theta, cfg.sigma)
    trace = res.trace
    lines = [_summary_text(res), "# diagnostics"]
    lines.append(f"shadow_identity_max_ulps = {float(np.max(ulps)):.3f}")
    have = np.isfinite(trace.bound)
    if np.any(have):
        ratio = trace.residual[have] / trace.bound[have]
        lines.append(f"max_residual_over_bound = {float(np.max(ratio)):.6g}")
    if math.isfinite(res.q_bound):
        lines.append(f"sup_x_over_q = {res.sup_x_norm / res.q_bound:.6g}")
    if np.any(np.isfinite(trace.lyapunov)):
        diffs = np.abs(np.diff(trace.lyapunov))
        lines.append(f"lyapunov_final_step_change = {float(diffs[-1]):.6g}")
        lines.append(f"lyapunov_max_late_change = {float(np.max(diffs[len(diffs) // 2:])):.6g}")
    with open(os.path.join(args.out, "diagnose.txt"), "w", encoding="utf-8") as fh:
        fh.write("\n".join(lines) + "\n")

    violations = trace.bound_violations()
    bad_ulps = float(np.max(ulps)) > 4.0
    if (violations or bad_ulps) and cfg.strict:
        print(
            f"error: diagnostics failed (bound violations = {violations}, "
            f"max ulps = {float(np.max(ulps)):.2f})",
            file=sys.stderr,
        )
        return EXIT_VIOLATION
    print(f"diagnose done: {args.out}/diagnose.txt")
    return EXIT_OK


def cmd_accept(args) -> int:
    results, ok = acceptance.run_all(emit=print)
    total = sum(r.seconds for r in results)
    print(f"{'all criteria passed' if ok else 'FAILURES present'} ({total:.1f}s)")
    if args.out is not None:
        _ensure_outdir(args.out, ["acceptance.txt"], args.force)
        with open(os.path.join(args.out, "acceptance.txt"), "w", encoding="utf-8") as fh:
            for r in results:
                fh.write(
                    f"[{'PASS' if r.passed else 'FAIL'}] criterion {r.number:2d}: "
                    f"{r.name} ({r.detail}) [{r.seconds:.1f}s]\n"
                )
    return EXIT_OK if ok else EXIT_VIOLATION


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="afmdw",
        description="Adaptive-method experiment runner with online hypothesis verification.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, needs_config=True):
        if needs_config:
            p.add_argument("--config", default=None, help="INI config file (defaults apply if omitted)")
            p.add_argument(
                "--set",
                action="append",
                metavar="SECTION.KEY=VALUE",
                help="override a config value (repeatable)",
            )
            p.add_argument("--seed", type=int, default=None, help="override the run seed")
        p.add_argument("--out", default="out", help="output directory (default: out)")
        p.add_argument(
            "--force",
            action="store_true",
            help="overwrite existing outputs and downgrade strict validation to warnings",
        )

    p_run = sub.add_parser("run", help="execute one configured run")
    common(p_run)
    p_run.add_argument(
        "--generic",
        action="store_true",
        help="use the generic step loop even when a dense kernel exists",
    )
    p_run.set_defaults(fn=cmd_run)

    p_sweep = sub.add_parser("sweep", help="run a parameter grid")
    common(p_sweep)
    p_sweep.add_argument(
        "--grid",
        action="append",
        metavar="SECTION.KEY=V1|V2|...",
        help="one grid axis (repeatable; cells are the cartesian product)",
    )
    p_sweep.add_argument("--jobs", type=int, default=1, help="worker threads (default 1)")
    p_sweep.set_defaults(fn=cmd_sweep)

    p_sim = sub.add_parser("simulate", help="integrate the matching differential inclusion")
    common(p_sim)
    p_sim.add_argument("--dt", type=float, default=1e-3, help="Euler stepsize (default 1e-3)")
    p_sim.add_argument("--t-end", type=float, default=5.0, help="integration horizon (default 5)")
    p_sim.set_defaults(fn=cmd_simulate)

    p_diag = sub.add_parser("diagnose", help="run and report every checkable quantity")
    common(p_diag)
    p_diag.set_defaults(fn=cmd_diagnose)

    p_acc = sub.add_parser("accept", help="run the acceptance suite")
    p_acc.add_argument("--out", default=None, help="also write acceptance.txt here")
    p_acc.add_argument("--force", action="store_true", help="overwrite an existing report")
    p_acc.set_defaults(fn=cmd_accept)

    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        with warnings.catch_warnings():
            warnings.simplefilter("always", RuntimeWarning)
            return args.fn(args)
    except ConfigViolation as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except ConfigError as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except OutputExists as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_IO
    except OSError as e:
        print(f"i/o error: {e}", file=sys.stderr)
        return EXIT_IO
    except AfmdwError as e:
        print(f"error: {type(e).__name__}: {e}", file=sys.stderr)
        return EXIT_CONFIG


if __name__ == "__main__":
    sys.exit(main())
