"""Steppers and the run loop.

Functional single-step entry points (afmdw_step, single_timescale_step,
adam_coupled_step, adamw_step) wrap the backend kernels; run() executes a
whole configured experiment and returns the trace plus state histories.

Update order inside every decoupled step is pinned as m -> v -> x: the
v-update sees the new momentum and the x-update sees both. Runs are
deterministic given the config (one rng seeded from config.seed draws x0
and then the component indices).
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

from . import _backend, diagnostics
from .core import (
    OptimizerState,
    RunConfig,
    ValidationReport,
    as_param_vector,
    mode_for_stepper,
    validate_config,
)
from .errors import ConfigError, ConfigViolation, DimensionMismatch
from .estimators import KIND_CODES, EstimatorScheme, bound_certificate, v0_default
from .problems import FiniteSumProblem, SubgradientSample, make_problem

_ST_CODE = KIND_CODES["st"]


def _carray(a, n: int | None = None) -> np.ndarray:
    out = np.ascontiguousarray(a, dtype=np.float64)
    if out.ndim != 1:
        raise DimensionMismatch(f"expected a 1-d vector, got shape {out.shape}")
    if n is not None and out.shape[0] != n:
        raise DimensionMismatch(f"expected length {n}, got {out.shape[0]}")
    return out


def _fresh(state: OptimizerState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    x = _carray(state.x)
    n = x.shape[0]
    return x.copy(), _carray(state.m, n).copy(), _carray(state.v, n).copy()


def afmdw_step(
    state: OptimizerState,
    g,
    eta_k: float,
    theta_k: float,
    beta_k: float,
    scheme: EstimatorScheme,
    sigma: float,
) -> OptimizerState:
    """One decoupled step: m' then v' = estimator(v, g, m') then
    x' = x - eta*H(v') (m' + sigma x)."""
    x, m, v = _fresh(state)
    g = _carray(g, x.shape[0])
    _backend.step_afmdw(
        scheme.code, x, m, v, g, eta_k, theta_k, beta_k, sigma,
        scheme.epsilon, scheme.clamp_lo, scheme.clamp_hi, scheme.literal_clamp,
    )
    return OptimizerState(x, m, v, state.k + 1)


def single_timescale_step(
    state: OptimizerState,
    g,
    eta_k: float,
    tau1: float,
    tau2: float,
    sigma: float,
    epsilon: float,
) -> OptimizerState:
    """Single-timescale step: theta = tau1*eta, v-stepsize tau2*eta, and the
    clipped preconditioner (max(v,0)+eps)^(-1/2)."""
    if not (tau1 > 0.0 and tau2 >= 4.0 * tau1):
        raise ConfigViolation(("timescale-ratio",), None)
    x, m, v = _fresh(state)
    g = _carray(g, x.shape[0])
    _backend.step_afmdw(
        _ST_CODE, x, m, v, g, eta_k, tau1 * eta_k, tau2 * eta_k, sigma,
        epsilon, 0.0, 0.0, False,
    )
    return OptimizerState(x, m, v, state.k + 1)


def adam_coupled_step(
    state: OptimizerState,
    g,
    eta_k: float,
    theta_k: float,
    beta_k: float,
    sigma: float,
    epsilon: float,
) -> OptimizerState:
    """Classic coupled baseline: decay folded into the sampled gradient."""
    x, m, v = _fresh(state)
    g = _carray(g, x.shape[0])
    _backend.step_coupled(x, m, v, g, eta_k, theta_k, beta_k, sigma, epsilon)
    return OptimizerState(x, m, v, state.k + 1)


def adamw_step(
    state: OptimizerState,
    g,
    eta_k: float,
    theta_k: float,
    rho_k: float,
    sigma: float,
    epsilon: float,
) -> OptimizerState:
    """Baseline with decay applied to x outside the preconditioner."""
    x, m, v = _fresh(state)
    g = _carray(g, x.shape[0])
    _backend.step_adamw(x, m, v, g, eta_k, theta_k, rho_k, sigma, epsilon)
    return OptimizerState(x, m, v, state.k + 1)


@dataclass(frozen=True)
class StepRecord:
    """One recorded transition, replayable bit-exactly via replay_step."""

    k: int
    sample: SubgradientSample
    eta_k: float
    theta_k: float
    beta_k: float
    state_before: OptimizerState
    state_after: OptimizerState
    stepper: str
    sigma: float
    scheme: EstimatorScheme | None = None
    epsilon: float = 1e-8
    tau1: float = 1.0
    tau2: float = 4.0


def replay_step(rec: StepRecord) -> OptimizerState:
    """Re-execute the recorded transition from state_before."""
    g = rec.sample.g
    if rec.stepper in ("afmdw", "adamd"):
        return afmdw_step(rec.state_before, g, rec.eta_k, rec.theta_k, rec.beta_k, rec.scheme, rec.sigma)
    if rec.stepper == "st":
        return single_timescale_step(rec.state_before, g, rec.eta_k, rec.tau1, rec.tau2, rec.sigma, rec.epsilon)
    if rec.stepper == "adam-coupled":
        return adam_coupled_step(rec.state_before, g, rec.eta_k, rec.theta_k, rec.beta_k, rec.sigma, rec.epsilon)
    if rec.stepper == "adamw":
        return adamw_step(rec.state_before, g, rec.eta_k, rec.theta_k, rec.beta_k, rec.sigma, rec.epsilon)
    raise ConfigError(f"unknown stepper {rec.stepper!r}")


@dataclass
class Histories:
    """Per-iteration state arrays. x/m/v have K+1 rows (row k = state after
    k steps); g and idx have K rows (the draw consumed by step k)."""

    x: np.ndarray
    m: np.ndarray
    v: np.ndarray
    g: np.ndarray
    idx: np.ndarray
    eta: np.ndarray
    theta: np.ndarray
    beta: np.ndarray


@dataclass
class RunResult:
    config: RunConfig
    problem: FiniteSumProblem
    report: ValidationReport
    trace: diagnostics.Trace
    final_state: OptimizerState
    histories: Histories
    constants: diagnostics.BoundConstants | None
    q_bound: float
    sup_x_norm: float
    backend: str = _backend.BACKEND_NAME
    wall_time_s: float = 0.0

    def step_record(self, k: int) -> StepRecord:
        """Materialize the k-th transition from the histories."""
        h = self.histories
        if not (0 <= k < h.g.shape[0]):
            raise DimensionMismatch(f"step {k} out of range [0, {h.g.shape[0]})")
        cfg = self.config
        sample = SubgradientSample(
            g=h.g[k].copy(), component_index=int(h.idx[k]), x_at_draw=h.x[k].copy()
        )
        return StepRecord(
            k=k,
            sample=sample,
            eta_k=float(h.eta[k]),
            theta_k=float(h.theta[k]),
            beta_k=float(h.beta[k]),
            state_before=OptimizerState(h.x[k].copy(), h.m[k].copy(), h.v[k].copy(), k),
            state_after=OptimizerState(h.x[k + 1].copy(), h.m[k + 1].copy(), h.v[k + 1].copy(), k + 1),
            stepper=cfg.stepper,
            sigma=cfg.sigma,
            scheme=cfg.scheme,
            epsilon=cfg.scheme.epsilon,
            tau1=cfg.tau1,
            tau2=cfg.tau2,
        )


def _stepper_code(stepper: str) -> int:
    if stepper in ("afmdw", "adamd", "st"):
        return _backend.STEP_DECOUPLED
    if stepper == "adam-coupled":
        return _backend.STEP_COUPLED
    return _backend.STEP_ADAMW


def adamd_run(cfg: RunConfig, problem: FiniteSumProblem | None = None) -> diagnostics.Trace:
    """Run Adam with decoupled decay (the 'adamd' stepper) and return its trace."""
    if cfg.stepper != "adamd":
        raise ConfigError(f"adamd_run needs stepper 'adamd', got {cfg.stepper!r}")
    return run(cfg, problem=problem).trace


def run(cfg: RunConfig, problem: FiniteSumProblem | None = None, force_generic: bool = False) -> RunResult:
    """Execute a configured run and assemble its diagnostics.

    Validation failures raise ConfigViolation in strict mode and downgrade
    to warnings otherwise. Histories are always recorded (the acceptance
    checks consume them); memory is K+1 rows of dim-length vectors.
    force_generic skips the dense kernel loop even when the problem has one
    (the two paths are bit-identical; tests assert that).
    """
    t_start = time.perf_counter()
    if problem is None:
        problem = make_problem(cfg.problem_id, dict(cfg.problem_params))

    bounds = (problem.m_f, problem.noise_bound) if math.isfinite(problem.m_f) else None
    report = validate_config(cfg, oracle_bounds=bounds, bounds_exact=problem.bounds_exact)
    if not report.ok:
        if cfg.strict:
            raise ConfigViolation(report.violated, report)
        warnings.warn(
            "running despite failed hypothesis checks: " + ", ".join(report.violated),
            RuntimeWarning,
            stacklevel=2,
        )

    sampling = cfg.problem_param("sampling", "single")
    if sampling not in ("single", "full"):
        raise ConfigError(f"problem.sampling must be 'single' or 'full', got {sampling!r}")
    full_mode = sampling == "full"

    K = cfg.max_iters
    n = problem.dim
    scheme = cfg.scheme

    rng = np.random.default_rng(cfg.seed)
    if cfg.x0 is not None:
        x = as_param_vector(cfg.x0, n).copy()
    else:
        x = cfg.x0_scale * rng.uniform(-1.0, 1.0, size=n)
    x = np.ascontiguousarray(x, dtype=np.float64)
    m = (
        as_param_vector(cfg.m0, n).copy()
        if cfg.m0 is not None
        else np.zeros(n, dtype=np.float64)
    )
    v = v0_default(scheme, n)
    if full_mode:
        idx = np.zeros(K, dtype=np.int64)
    else:
        idx = rng.integers(0, problem.n_components, size=K, dtype=np.int64)

    eta_arr = cfg.eta.array(K)
    if cfg.stepper == "st":
        theta_arr = cfg.tau1 * eta_arr
        beta_arr = cfg.tau2 * eta_arr
    else:
        theta_arr = cfg.theta.array(K)
        beta_arr = cfg.beta.array(K)

    r_out = np.empty(K + 1)
    gn_out = np.empty(K + 1)
    mn_out = np.empty(K + 1)
    xn_out = np.empty(K + 1)
    obj_out = np.empty(K + 1)
    xh = np.empty((K + 1, n))
    mh = np.empty((K + 1, n))
    vh = np.empty((K + 1, n))
    gh = np.empty((K, n))

    stepper_code = _stepper_code(cfg.stepper)
    kind_code = _ST_CODE if cfg.stepper == "st" else scheme.code

    if problem.kernel_code is not None and not force_generic:
        _backend.run_dense(
            stepper_code, kind_code, problem.kernel_code,
            problem.kernel_p1, problem.kernel_p2,
            x, m, v, idx, eta_arr, theta_arr, beta_arr,
            cfg.sigma, scheme.epsilon, scheme.clamp_lo, scheme.clamp_hi,
            scheme.literal_clamp, full_mode,
            r_out, gn_out, mn_out, xn_out, obj_out,
            xh, mh, vh, gh, True,
        )
    else:
        _run_generic(
            cfg, problem, stepper_code, kind_code, x, m, v, idx,
            eta_arr, theta_arr, beta_arr, full_mode,
            r_out, gn_out, mn_out, xn_out, obj_out, xh, mh, vh, gh,
        )
    xh[K] = x
    mh[K] = m
    vh[K] = v

    histories = Histories(x=xh, m=mh, v=vh, g=gh, idx=idx, eta=eta_arr, theta=theta_arr, beta=beta_arr)
    final_state = OptimizerState(x, m, v, K)

    # realized constants and the residual bound column
    mode = mode_for_stepper(cfg.stepper)
    constants = None
    bound_col = np.full(K + 1, math.nan)
    if mode == "non-diminishing" and bounds is not None:
        eps_v, m_v = bound_certificate(scheme, problem.m_f, problem.noise_bound)
        if math.isfinite(m_v):
            m_x = max(float(np.max(xn_out)), _backend.norm_seq(mh[0]))
            m_d = max(float(np.max(gn_out[:K] + mn_out[:K])), float(mn_out[K]))
            contraction = np.maximum(
                np.abs(1.0 - eta_arr * (cfg.sigma * m_v)),
                np.abs(1.0 - eta_arr * (cfg.sigma * eps_v)),
            )
            eta_tilde = 1.0 - float(np.max(contraction))
            if eta_tilde > 0.0:
                constants = diagnostics.BoundConstants(
                    sigma=cfg.sigma, m_x=m_x, m_d=m_d, eta_tilde=eta_tilde
                )
                delta_hat = diagnostics.bound_series(constants, theta_arr)
                bound_col[0] = cfg.sigma * m_x + m_d
                bound_col[1:] = delta_hat

    # Lyapunov column for the single-timescale system
    lyap_col = np.full(K + 1, math.nan)
    if cfg.stepper == "st":
        for k in range(K + 1):
            lyap_col[k] = diagnostics.lyapunov_h(
                problem, xh[k], mh[k], vh[k], cfg.sigma, cfg.tau1, scheme.epsilon
            )

    # sampled stationarity gaps
    gap_col = np.full(K + 1, math.nan)
    ge = cfg.diagnostics.gap_every
    if ge > 0 and problem.structure is not None:
        rows = sorted(set(range(0, K + 1, ge)) | {K})
        eps_mach = float(np.finfo(np.float64).eps)
        for k in rows:
            if cfg.diagnostics.gap_delta is not None:
                delta = cfg.diagnostics.gap_delta
            elif math.isfinite(bound_col[k]):
                delta = bound_col[k] * (1.0 + cfg.sigma) / cfg.sigma + eps_mach
            else:
                delta = 0.0
            gap_col[k] = diagnostics.stationarity_gap(problem, xh[k], delta, cfg.sigma)

    ks = np.arange(K + 1, dtype=np.float64)
    t_clock = np.concatenate(([0.0], np.cumsum(eta_arr)))
    pad = np.full(1, math.nan)
    trace = diagnostics.Trace(
        mode=cfg.stepper,
        k=ks,
        t=t_clock,
        objective=obj_out,
        residual=r_out,
        bound=bound_col,
        xy_dist=r_out / cfg.sigma,
        lyapunov=lyap_col,
        stat_gap=gap_col,
        eta=np.concatenate((eta_arr, pad)),
        theta=np.concatenate((theta_arr, pad)),
        beta=np.concatenate((beta_arr, pad)),
    )

    # realized growth bound Q (iterate boundedness)
    sup_x = float(np.max(xn_out))
    q_bound = math.nan
    if mode != "baseline" and bounds is not None and problem.growth_nu is not None:
        eps_v, m_v = bound_certificate(scheme, problem.m_f, problem.noise_bound)
        if math.isfinite(m_v):
            nu = problem.growth_nu
            l_hat = float(np.max(gn_out[:K] / (1.0 + xn_out[:K] ** nu))) if K > 0 else 0.0
            q_bound = max(
                (2.0 * m_v * l_hat / (eps_v * cfg.sigma)) ** (1.0 / (1.0 - nu)),
                m_v * _backend.norm_seq(mh[0]) / (eps_v * cfg.sigma),
                _backend.norm_seq(xh[0]) + 1.0,
            )

    return RunResult(
        config=cfg,
        problem=problem,
        report=report,
        trace=trace,
        final_state=final_state,
        histories=histories,
        constants=constants,
        q_bound=q_bound,
        sup_x_norm=sup_x,
        wall_time_s=time.perf_counter() - t_start,
    )


def _run_generic(
    cfg, problem, stepper_code, kind_code, x, m, v, idx,
    eta_arr, theta_arr, beta_arr, full_mode,
    r_out, gn_out, mn_out, xn_out, obj_out, xh, mh, vh, gh,
):
    """Python twin of the dense kernel loop, for problems without one.

    Bit-identical to run_dense on kernel problems: same step functions, same
    oracle, same sequential reductions.
    """
    K = eta_arr.shape[0]
    scheme = cfg.scheme
    sigma = cfg.sigma
    for k in range(K):
        if full_mode:
            g = problem.full_subgradient(x)
        else:
            g = problem.subgrad_component(int(idx[k]), x)
        g = np.ascontiguousarray(g, dtype=np.float64)
        f = problem.eval_full(x)
        r_out[k] = _backend.residual_norm(x, m, sigma)
        gn_out[k] = _backend.norm_seq(g)
        mn_out[k] = _backend.norm_seq(m)
        xsq = _backend.dot_seq(x, x)
        xn_out[k] = math.sqrt(xsq)
        obj_out[k] = f + 0.5 * sigma * xsq
        xh[k] = x
        mh[k] = m
        vh[k] = v
        gh[k] = g
        if stepper_code == _backend.STEP_DECOUPLED:
            _backend.step_afmdw(
                kind_code, x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k],
                sigma, scheme.epsilon, scheme.clamp_lo, scheme.clamp_hi, scheme.literal_clamp,
            )
        elif stepper_code == _backend.STEP_COUPLED:
            _backend.step_coupled(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k], sigma, scheme.epsilon)
        else:
            _backend.step_adamw(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k], sigma, scheme.epsilon)
    f = problem.eval_full(x)
    r_out[K] = _backend.residual_norm(x, m, sigma)
    gn_out[K] = math.nan
    mn_out[K] = _backend.norm_seq(m)
    xsq = _backend.dot_seq(x, x)
    xn_out[K] = math.sqrt(xsq)
    obj_out[K] = f + 0.5 * sigma * xsq
