"""End-to-end acceptance checks.

Ten numbered criteria, each a function returning (passed, detail). Expensive
run suites are cached on a shared context so the CLI command and the test
suite pay for them once. All runs are deterministic; re-running produces the
identical report.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass

import numpy as np

from . import diagnostics, inclusion
from .autodiff import ad_backward, finite_difference_grad
from .core import ConstantSchedule, DiagnosticsConfig, OptimizerState, PowerSchedule, RunConfig
from .engine import (
    StepRecord,
    adam_coupled_step,
    adamw_step,
    afmdw_step,
    run,
    single_timescale_step,
)
from .estimators import (
    EstimatorScheme,
    bound_certificate,
    precondition,
    update_estimator,
    v0_default,
)
from .problems import ReluMLP, SubgradientSample, make_problem

SUITE_KINDS = ("sgdw", "adam", "amsgrad", "adamax", "radam", "adabelief", "adabound", "yogi")

_SUITE_PROBLEMS = (
    ("abs1d", ()),
    ("l1quad", (("c", "-1; 1"),)),
    ("maxpiece2d", (("a", "1,0; -1,0; 0,1"), ("b", "0, 0, 0"))),
)
_SUITE_SEEDS = (1, 2, 3)

# pinned by pilot runs; see the acceptance tests for the hand-derived cases
SETTLE_K0 = 2000


def _suite_config(kind: str, problem_id: str, params: tuple, seed: int) -> RunConfig:
    beta = ConstantSchedule(0.999) if kind == "adamax" else ConstantSchedule(1e-4)
    return RunConfig(
        problem_id=problem_id,
        problem_params=params,
        stepper="afmdw",
        scheme=EstimatorScheme(kind, epsilon=1.0, clamp_lo=0.5, clamp_hi=2.0),
        sigma=0.1,
        eta=ConstantSchedule(0.05),
        theta=PowerSchedule(0.1, 0.7),
        beta=beta,
        max_iters=10_000,
        seed=seed,
    )


def _slope_config(gamma: float) -> RunConfig:
    # a healthy constant eta keeps the iterate glued to its shadow, so the
    # residual shows the clean k^(-gamma) envelope instead of the transient
    return RunConfig(
        problem_id="abs1d",
        stepper="adamd",
        scheme=EstimatorScheme("adam", epsilon=1.0),
        sigma=0.1,
        eta=ConstantSchedule(1.0),
        theta=PowerSchedule(0.1, gamma),
        beta=ConstantSchedule(1e-4),
        max_iters=100_000,
        seed=1,
    )


def _stationarity_config(problem_id: str, params: tuple, seed: int) -> RunConfig:
    return RunConfig(
        problem_id=problem_id,
        problem_params=params,
        stepper="adamd",
        scheme=EstimatorScheme("adam", epsilon=1.0),
        sigma=0.1,
        eta=ConstantSchedule(0.05),
        theta=PowerSchedule(0.1, 0.7),
        beta=ConstantSchedule(1e-4),
        max_iters=100_000,
        seed=seed,
    )


def _st_config() -> RunConfig:
    return RunConfig(
        problem_id="quad",
        problem_params=(("dim", "3"), ("sampling", "full")),
        stepper="st",
        scheme=EstimatorScheme("st", epsilon=0.01),
        sigma=0.1,
        tau1=1.0,
        tau2=4.0,
        eta=PowerSchedule(0.5, 0.6),
        max_iters=20_000,
        seed=3,
        diagnostics=DiagnosticsConfig(gap_every=5_000),
    )


def _tracking_config(theta0: float) -> RunConfig:
    steps = int(math.ceil(2.2 / theta0)) + 1
    return RunConfig(
        problem_id="abs1d",
        problem_params=(("sampling", "full"),),
        stepper="adamd",
        scheme=EstimatorScheme("adam", epsilon=1.0),
        sigma=1.0,
        eta=ConstantSchedule(0.05),
        theta=ConstantSchedule(theta0),
        beta=ConstantSchedule(1e-4),
        max_iters=steps,
        seed=1,
        strict=False,  # constant theta fails the log-decay hypothesis by design
        x0=(1.0,),
        m0=(-1.0,),
    )


class AcceptanceContext:
    """Caches the shared run suites."""

    def __init__(self):
        self._suite = None
        self._slopes = None
        self._stationarity = None
        self._st = None
        self._tracking = None
        self.suite_seconds = 0.0
        self.slope_seconds = 0.0

    @property
    def suite_runs(self):
        if self._suite is None:
            t0 = time.perf_counter()
            runs = []
            for kind in SUITE_KINDS:
                for problem_id, params in _SUITE_PROBLEMS:
                    for seed in _SUITE_SEEDS:
                        cfg = _suite_config(kind, problem_id, params, seed)
                        runs.append(run(cfg))
            self.suite_seconds = time.perf_counter() - t0
            self._suite = runs
        return self._suite

    @property
    def slope_runs(self):
        if self._slopes is None:
            t0 = time.perf_counter()
            self._slopes = {g: run(_slope_config(g)) for g in (0.5, 0.8, 1.0)}
            self.slope_seconds = time.perf_counter() - t0
        return self._slopes

    @property
    def stationarity_runs(self):
        if self._stationarity is None:
            runs = []
            for problem_id, params in (("abs1d", ()), ("l1quad", (("c", "-1; 0; 1"),))):
                for seed in range(1, 6):
                    runs.append(run(_stationarity_config(problem_id, params, seed)))
            self._stationarity = runs
        return self._stationarity

    @property
    def st_run(self):
        if self._st is None:
            self._st = run(_st_config())
        return self._st

    @property
    def tracking_runs(self):
        if self._tracking is None:
            runs = []
            with warnings.catch_warnings():
                # constant theta fails the log-decay hypothesis on purpose
                warnings.simplefilter("ignore", RuntimeWarning)
                for theta0 in (0.1, 0.05, 0.025):
                    runs.append(run(_tracking_config(theta0)))
            self._tracking = runs
        return self._tracking

    @property
    def tracking_distances(self):
        problem = make_problem("abs1d")
        ref = inclusion.integrate_di_sgd(problem, np.array([1.0]), sigma=1.0, dt=1e-4, T=2.2)
        dists = []
        for res in self.tracking_runs:
            y = -res.histories.m / 1.0
            steps = res.histories.theta / 1.0
            path = diagnostics.interpolate(y, steps)
            dists.append(inclusion.path_distance(path, ref, 2.0))
        return dists


def _criterion_1(ctx):
    """Residual bound holds at every iteration of the full suite."""
    t0 = time.perf_counter()
    runs = ctx.suite_runs
    elapsed = ctx.suite_seconds + (time.perf_counter() - t0)
    bad = 0
    worst = 0.0
    rows = 0
    for res in runs:
        if res.constants is None:
            return False, f"missing bound constants on {res.config.scheme.kind}/{res.config.problem_id}"
        bad += res.trace.bound_violations()
        ratio = np.max(res.trace.residual / res.trace.bound)
        worst = max(worst, float(ratio))
        rows += len(res.trace)
    ok = bad == 0 and elapsed < 60.0
    return ok, (
        f"{len(runs)} runs, {rows} rows, {bad} violations, "
        f"max residual/bound = {worst:.3g}, {elapsed:.1f}s"
    )


def _criterion_2(ctx):
    """Shadow identity within 4 ulps on every step; coupled record fails it."""
    worst = 0.0
    decoupled = (
        ctx.suite_runs
        + list(ctx.slope_runs.values())
        + ctx.stationarity_runs
        + ctx.tracking_runs
        + [ctx.st_run]
    )
    for res in decoupled:
        h = res.histories
        ulps = diagnostics.shadow_identity_ulps(h.m, h.g, h.theta, res.config.sigma)
        worst = max(worst, float(np.max(ulps)))
        if worst > 4.0:
            return False, f"{worst:.2f} ulps on {res.config.scheme.kind}/{res.config.problem_id}"
    # counterexample: a coupled step from a non-stationary state
    state = OptimizerState(np.array([1.0]), np.array([0.5]), np.array([0.2]), 0)
    g = np.array([2.0])
    after = adam_coupled_step(state, g, 0.1, 0.5, 0.5, sigma=0.1, epsilon=1e-8)
    rec = StepRecord(
        k=0,
        sample=SubgradientSample(g=g, component_index=0, x_at_draw=state.x.copy()),
        eta_k=0.1, theta_k=0.5, beta_k=0.5,
        state_before=state, state_after=after,
        stepper="adam-coupled", sigma=0.1,
    )
    fails = not diagnostics.shadow_step_check(rec)
    return worst <= 4.0 and fails, (
        f"max {worst:.2f} ulps across decoupled runs; coupled counterexample fails = {fails}"
    )


def _criterion_3(ctx):
    """Log-log residual slope tracks the momentum decay exponent."""
    t0 = time.perf_counter()
    runs = ctx.slope_runs
    elapsed = ctx.slope_seconds + (time.perf_counter() - t0)
    slopes = {}
    for gamma, res in runs.items():
        slopes[gamma] = diagnostics.loglog_slope(res.trace.residual, 0.3, k=res.trace.k)
    ok = all(abs(slopes[g] + g) <= 0.15 for g in slopes)
    ordered = slopes[1.0] < slopes[0.8] < slopes[0.5]
    ok = ok and ordered and elapsed < 30.0
    detail = ", ".join(f"gamma={g}: slope={slopes[g]:.3f}" for g in sorted(slopes))
    return ok, f"{detail}; ordered={ordered}, {elapsed:.1f}s"


def _criterion_4(ctx):
    """Final iterates land on the stationary set."""
    worst = 0.0
    for res in ctx.stationarity_runs:
        pts = inclusion.brute_force_stationary(res.problem, res.config.sigma)
        d = min(float(np.linalg.norm(res.final_state.x - p)) for p in pts)
        worst = max(worst, d)
    return worst <= 1e-2, f"10 runs, max dist to stationary set = {worst:.3g}"


def _criterion_5(ctx):
    """Preconditioner stays inside its certified range on random streams."""
    m_f, m_xi = 1.0, 2.0
    bound = m_f + m_xi
    steps = 100_000
    dim = 4
    worst_margin = math.inf
    for j, kind in enumerate(SUITE_KINDS):
        beta1 = 0.999 if kind == "adamax" else 0.01
        scheme = EstimatorScheme(kind, beta1=beta1, epsilon=1.0, clamp_lo=0.5, clamp_hi=2.0)
        eps_v, m_v = bound_certificate(scheme, m_f, m_xi)
        rng = np.random.default_rng(100 + j)
        v = v0_default(scheme, dim)
        m = np.zeros(dim)
        slack = 4.0 * np.finfo(np.float64).eps
        for k in range(steps):
            g = rng.uniform(-bound, bound, size=dim)
            theta = 0.1 / (k + 1.0) ** 0.7
            m = (1.0 - theta) * m + theta * g
            v = update_estimator(scheme, v, g, m, k)
            h = precondition(scheme, v)
            lo = float(np.min(h))
            hi = float(np.max(h))
            if lo < eps_v * (1.0 - slack) or hi > m_v * (1.0 + slack):
                return False, f"{kind}: H in [{lo:.6g}, {hi:.6g}] outside [{eps_v:.6g}, {m_v:.6g}] at k={k}"
            worst_margin = min(worst_margin, lo - eps_v, m_v - hi)
    return True, f"8 kinds x {steps} steps, zero violations, min margin {worst_margin:.3g}"


def _criterion_6(ctx):
    """Realized iterate norms stay below the growth constant Q."""
    checked = 0
    for res in ctx.suite_runs + ctx.stationarity_runs + list(ctx.slope_runs.values()):
        if not math.isfinite(res.q_bound):
            return False, f"missing Q on {res.config.stepper}/{res.config.problem_id}"
        if res.sup_x_norm > res.q_bound:
            return False, (
                f"sup||x|| = {res.sup_x_norm:.6g} exceeds Q = {res.q_bound:.6g} "
                f"on {res.config.scheme.kind}/{res.config.problem_id}"
            )
        checked += 1
    return True, f"{checked} runs, zero violations"


def _criterion_7(ctx):
    """Single-timescale h settles and the final stationarity gap is small."""
    res = ctx.st_run
    h = res.trace.lyapunov
    diffs = np.abs(np.diff(h))
    tail = diffs[SETTLE_K0:]
    settled = bool(np.all(tail < 1e-8))
    gap = float(res.trace.stat_gap[-1])
    ok = settled and gap < 1e-3
    return ok, (
        f"max |h_k - h_(k-1)| beyond k0={SETTLE_K0}: {float(np.max(tail)):.3g}, "
        f"final gap = {gap:.3g}"
    )


def _criterion_8(ctx):
    """Shadow interpolated process tracks the subgradient-flow path."""
    d1, d2, d3 = ctx.tracking_distances
    ok = d1 > d2 > d3
    return ok, f"distances at theta0 = 0.1/0.05/0.025: {d1:.4g} > {d2:.4g} > {d3:.4g} = {ok}"


def _criterion_9(ctx):
    """Reverse-mode gradients match central differences at smooth points and
    stay inside the one-sided hull at kinks."""
    problem = ReluMLP()
    rng = np.random.default_rng(42)
    checked = 0
    worst = 0.0
    while checked < 100:
        x = rng.uniform(-2.0, 2.0, size=problem.dim)
        i = int(rng.integers(0, problem.n_components))
        u = problem.inputs[i]
        pre = x[0:8].reshape(4, 2) @ u + x[8:12]
        if np.min(np.abs(pre)) < 1e-2:
            continue
        graph = problem._graphs[i]
        g_ad = ad_backward(graph, x)
        g_fd = finite_difference_grad(lambda z: problem.eval_component(i, z), x, h=1e-6)
        rel = float(np.linalg.norm(g_ad - g_fd) / max(np.linalg.norm(g_fd), 1e-12))
        worst = max(worst, rel)
        if rel >= 1e-6:
            return False, f"rel err {rel:.3g} at sample {checked}"
        checked += 1

    # engineered kink: unit 0 preactivation exactly zero
    hull_ok = True
    for trial in range(10):
        x = rng.uniform(-1.0, 1.0, size=problem.dim)
        i = int(rng.integers(0, problem.n_components))
        u = problem.inputs[i]
        x[0] = 1.0
        x[1] = 0.0
        x[8] = -x[0] * u[0]  # pre_0 = b + w00*u0 + w01*u1 = 0 exactly
        graph = problem._graphs[i]
        g_kink = ad_backward(graph, x)
        xp = x.copy()
        xm = x.copy()
        xp[8] += 1e-9
        xm[8] -= 1e-9
        g_hi = ad_backward(graph, xp)
        g_lo = ad_backward(graph, xm)
        lo = np.minimum(g_lo, g_hi) - 1e-9
        hi = np.maximum(g_lo, g_hi) + 1e-9
        if not (np.all(g_kink >= lo) and np.all(g_kink <= hi)):
            hull_ok = False
            break
    return hull_ok, f"100 smooth points, worst rel err {worst:.3g}; kink hull check = {hull_ok}"


# frozen high-precision recomputations of the worked step examples
_GOLD_SGDW = (1.0, 0.89)
_GOLD_ST = (0.2, 1.6, 0.97635668781282704)
_GOLD_COUPLED = (1.05, 2.205, 0.92928932235753574)
_GOLD_ADAMW = (1.0, 2.0, 0.91928932238134525)


def _criterion_10(ctx):
    """Golden hand-stepped examples reproduce frozen values to 1e-12."""
    errs = []

    s = OptimizerState(np.array([1.0]), np.array([0.0]), np.array([0.0]), 0)
    out = afmdw_step(s, np.array([2.0]), 0.1, 0.5, 1e-4, EstimatorScheme("sgdw"), 0.1)
    errs.append(abs(out.m[0] - _GOLD_SGDW[0]))
    errs.append(abs(out.x[0] - _GOLD_SGDW[1]))

    s = OptimizerState(np.array([1.0]), np.array([0.0]), np.array([0.0]), 0)
    out = single_timescale_step(s, np.array([2.0]), 0.1, 1.0, 4.0, 0.1, 0.01)
    errs.append(abs(out.m[0] - _GOLD_ST[0]))
    errs.append(abs(out.v[0] - _GOLD_ST[1]))
    errs.append(abs(out.x[0] - _GOLD_ST[2]))

    s = OptimizerState(np.array([1.0]), np.array([0.0]), np.array([0.0]), 0)
    out = adam_coupled_step(s, np.array([2.0]), 0.1, 0.5, 0.5, 0.1, 1e-8)
    errs.append(abs(out.m[0] - _GOLD_COUPLED[0]))
    errs.append(abs(out.v[0] - _GOLD_COUPLED[1]))
    errs.append(abs(out.x[0] - _GOLD_COUPLED[2]))

    s = OptimizerState(np.array([1.0]), np.array([0.0]), np.array([0.0]), 0)
    out = adamw_step(s, np.array([2.0]), 0.1, 0.5, 0.5, 0.1, 1e-8)
    errs.append(abs(out.m[0] - _GOLD_ADAMW[0]))
    errs.append(abs(out.v[0] - _GOLD_ADAMW[1]))
    errs.append(abs(out.x[0] - _GOLD_ADAMW[2]))

    worst = max(errs)
    return worst <= 1e-12, f"11 frozen values, max abs err {worst:.3g}"


CRITERIA = (
    (1, "residual bound holds on the full suite", _criterion_1),
    (2, "shadow identity within 4 ulps; coupled record fails", _criterion_2),
    (3, "residual decay slope matches the theta exponent", _criterion_3),
    (4, "final iterates reach the stationary set", _criterion_4),
    (5, "preconditioner range certificates", _criterion_5),
    (6, "iterate norms below the growth constant Q", _criterion_6),
    (7, "single-timescale Lyapunov settling and final gap", _criterion_7),
    (8, "shadow path tracks the subgradient flow", _criterion_8),
    (9, "reverse-mode gradients vs central differences and kink hulls", _criterion_9),
    (10, "golden hand-stepped examples to 1e-12", _criterion_10),
)


@dataclass
class CriterionResult:
    number: int
    name: str
    passed: bool
    detail: str
    seconds: float


def run_all(ctx: AcceptanceContext | None = None, emit=None):
    """Run every criterion; returns (results, all_passed)."""
    ctx = ctx or AcceptanceContext()
    results = []
    for number, name, fn in CRITERIA:
        t0 = time.perf_counter()
        passed, detail = fn(ctx)
        dt = time.perf_counter() - t0
        results.append(CriterionResult(number, name, passed, detail, dt))
        if emit is not None:
            emit(f"[{'PASS' if passed else 'FAIL'}] criterion {number:2d}: {name} ({detail})")
    return results, all(r.passed for r in results)
