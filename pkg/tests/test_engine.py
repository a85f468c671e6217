"""Steppers and the run loop: frozen single-step values, update ordering,
bit-exact replay, and cross-path agreement."""

import warnings

import numpy as np
import pytest

from afmdw.core import ConstantSchedule, DiagnosticsConfig, OptimizerState, PowerSchedule, RunConfig
from afmdw.engine import (
    adam_coupled_step,
    adamd_run,
    adamw_step,
    afmdw_step,
    replay_step,
    run,
    single_timescale_step,
)
from afmdw.errors import ConfigError, ConfigViolation
from afmdw.estimators import EstimatorScheme


def fresh():
    return OptimizerState(np.array([1.0]), np.array([0.0]), np.array([0.0]), 0)


G2 = np.array([2.0])


# frozen single-step values (hand-stepped at these exact parameters)


def test_sgdw_step_golden():
    out = afmdw_step(fresh(), G2, 0.1, 0.5, 0.5, EstimatorScheme("sgdw"), 0.1)
    assert abs(out.m[0] - 1.0) <= 1e-12
    assert abs(out.x[0] - 0.89) <= 1e-12
    assert out.v[0] == 0.0 or out.v[0] > 0  # sgdw ignores v for H but may update it
    assert out.k == 1


def test_single_timescale_step_golden():
    out = single_timescale_step(fresh(), G2, 0.1, 1.0, 4.0, 0.1, 0.01)
    assert abs(out.m[0] - 0.2) <= 1e-12
    assert abs(out.v[0] - 1.6) <= 1e-12
    # x' = 1 - 0.1 * (1.61)^(-1/2) * (0.2 + 0.1)
    assert abs(out.x[0] - 0.97635668781282704) <= 1e-12


def test_adam_coupled_step_golden():
    out = adam_coupled_step(fresh(), G2, 0.1, 0.5, 0.5, 0.1, 1e-8)
    assert abs(out.m[0] - 1.05) <= 1e-12
    assert abs(out.v[0] - 2.205) <= 1e-12
    assert abs(out.x[0] - 0.92928932235753574) <= 1e-12


def test_adamw_step_golden():
    out = adamw_step(fresh(), G2, 0.1, 0.5, 0.5, 0.1, 1e-8)
    assert abs(out.m[0] - 1.0) <= 1e-12
    assert abs(out.v[0] - 2.0) <= 1e-12
    # x' = (1 - 0.1/(sqrt(2)+1e-8)) - 0.01: decay from the pre-update x
    assert abs(out.x[0] - 0.91928932238134525) <= 1e-12


def test_adabelief_step_golden():
    # m' = 0.5*0 + 0.5*2 = 1, no: theta=0.5 from m=0.5 start below
    s = OptimizerState(np.array([1.0]), np.array([0.5]), np.array([0.5]), 0)
    out = afmdw_step(s, G2, 0.1, 0.5, 0.5, EstimatorScheme("adabelief", epsilon=1e-8), 0.1)
    # m' = 0.5*0.5 + 0.5*2 = 1.25; v' = 0.5*0.5 + 0.5*(2-1.25)^2 = 0.53125
    assert abs(out.m[0] - 1.25) <= 1e-12
    assert abs(out.v[0] - 0.53125) <= 1e-12
    want_x = 1.0 - 0.1 * (1.25 + 0.1) / (np.sqrt(0.53125) + 1e-8)
    assert abs(out.x[0] - want_x) <= 1e-12


def test_decoupled_update_order_is_m_then_v_then_x():
    """v must see the fresh momentum (adabelief) and x the fresh v."""
    s = OptimizerState(np.array([1.0]), np.array([0.5]), np.array([0.5]), 0)
    out = afmdw_step(s, G2, 0.1, 0.5, 0.5, EstimatorScheme("adabelief", epsilon=1e-8), 0.1)
    # mutant A: v read the stale momentum 0.5 -> (2-0.5)^2
    stale_v = 0.5 * 0.5 + 0.5 * (2.0 - 0.5) ** 2
    assert abs(out.v[0] - stale_v) > 1e-6
    # mutant B: x read the stale v
    x_stale = 1.0 - 0.1 * (1.25 + 0.1) / (np.sqrt(0.5) + 1e-8)
    assert abs(out.x[0] - x_stale) > 1e-6


def test_decay_is_decoupled_from_momentum():
    """m never sees sigma; only the x-update does."""
    a = afmdw_step(fresh(), G2, 0.1, 0.5, 0.5, EstimatorScheme("sgdw"), 0.0001)
    b = afmdw_step(fresh(), G2, 0.1, 0.5, 0.5, EstimatorScheme("sgdw"), 10.0)
    assert a.m[0] == b.m[0]
    coupled_a = adam_coupled_step(fresh(), G2, 0.1, 0.5, 0.5, 0.0001, 1e-8)
    coupled_b = adam_coupled_step(fresh(), G2, 0.1, 0.5, 0.5, 10.0, 1e-8)
    assert coupled_a.m[0] != coupled_b.m[0]


def test_adamw_decay_uses_pre_update_x():
    # with theta = 0 the x-update is pure decay: x' = x - eta*sigma*x
    s = OptimizerState(np.array([2.0]), np.array([0.0]), np.array([4.0]), 0)
    out = adamw_step(s, np.array([0.0]), 0.5, 1e-9, 1e-9, 0.3, 1e-8)
    assert out.x[0] == pytest.approx(2.0 - 0.5 * 0.3 * 2.0, rel=1e-12)


def test_st_gate_enforces_timescale_ratio():
    with pytest.raises(ConfigViolation) as exc:
        single_timescale_step(fresh(), G2, 0.1, 1.0, 3.99, 0.1, 0.01)
    assert "timescale-ratio" in exc.value.violated


def test_steppers_do_not_mutate_input_state():
    s = fresh()
    afmdw_step(s, G2, 0.1, 0.5, 0.5, EstimatorScheme("adam"), 0.1)
    adam_coupled_step(s, G2, 0.1, 0.5, 0.5, 0.1, 1e-8)
    adamw_step(s, G2, 0.1, 0.5, 0.5, 0.1, 1e-8)
    assert s.x[0] == 1.0 and s.m[0] == 0.0 and s.v[0] == 0.0 and s.k == 0


# run loop


def _cfg(**kw):
    base = dict(
        problem_id="l1quad",
        problem_params=(("c", "-1; 1"),),
        stepper="adamd",
        scheme=EstimatorScheme("adam", epsilon=1.0),
        sigma=0.1,
        eta=ConstantSchedule(0.05),
        theta=PowerSchedule(0.1, 0.7),
        beta=ConstantSchedule(1e-4),
        max_iters=300,
        seed=4,
    )
    base.update(kw)
    return RunConfig(**base)


def test_run_shapes_and_schedule_columns():
    res = run(_cfg())
    h = res.histories
    K = 300
    assert h.x.shape == (K + 1, 1) and h.g.shape == (K, 1) and h.idx.shape == (K,)
    assert len(res.trace) == K + 1
    assert res.trace.k[0] == 0 and res.trace.k[-1] == K
    assert np.array_equal(h.eta, np.full(K, 0.05))
    assert h.theta[0] == 0.1
    assert res.trace.t[0] == 0.0
    assert res.trace.t[-1] == pytest.approx(0.05 * K, rel=1e-12)
    # final schedule row in the trace is padding
    assert np.isnan(res.trace.eta[-1]) and np.isnan(res.trace.theta[-1])


def test_run_is_deterministic_in_seed():
    a = run(_cfg(seed=11))
    b = run(_cfg(seed=11))
    c = run(_cfg(seed=12))
    assert np.array_equal(a.histories.x, b.histories.x)
    assert np.array_equal(a.histories.idx, b.histories.idx)
    assert not np.array_equal(a.histories.idx, c.histories.idx)


def test_run_replays_bit_exactly():
    res = run(_cfg(max_iters=50))
    for k in (0, 1, 7, 49):
        rec = res.step_record(k)
        out = replay_step(rec)
        assert np.array_equal(out.x, rec.state_after.x)
        assert np.array_equal(out.m, rec.state_after.m)
        assert np.array_equal(out.v, rec.state_after.v)


def test_run_st_replays_bit_exactly():
    cfg = _cfg(
        problem_id="quad",
        problem_params=(("dim", "2"), ("sampling", "full")),
        stepper="st",
        scheme=EstimatorScheme("st", epsilon=0.01),
        eta=PowerSchedule(0.5, 0.6),
        max_iters=40,
    )
    res = run(cfg)
    for k in (0, 13, 39):
        rec = res.step_record(k)
        out = replay_step(rec)
        assert np.array_equal(out.x, rec.state_after.x)
        assert np.array_equal(out.m, rec.state_after.m)
        assert np.array_equal(out.v, rec.state_after.v)


def test_adamd_run_matches_run():
    cfg = _cfg(max_iters=200)
    t1 = adamd_run(cfg)
    t2 = run(cfg).trace
    assert np.array_equal(t1.residual, t2.residual)
    assert np.array_equal(t1.objective, t2.objective)
    with pytest.raises(ConfigError):
        adamd_run(_cfg(stepper="afmdw"))


def test_explicit_x0_m0_and_seeded_default():
    res = run(_cfg(x0=(0.25,), m0=(-0.5,)))
    assert res.histories.x[0, 0] == 0.25
    assert res.histories.m[0, 0] == -0.5
    seeded = run(_cfg(seed=3, x0_scale=0.5))
    assert abs(seeded.histories.x[0, 0]) <= 0.5
    assert seeded.histories.m[0, 0] == 0.0


def test_strict_validation_raises_and_nonstrict_warns():
    bad = _cfg(theta=ConstantSchedule(0.1))
    with pytest.raises(ConfigViolation) as exc:
        run(bad)
    assert "theta-log-decay" in exc.value.violated
    with warnings.catch_warnings(record=True) as caught:
        warnings.simplefilter("always")
        res = run(_cfg(theta=ConstantSchedule(0.1), strict=False))
    assert any("theta-log-decay" in str(w.message) for w in caught)
    assert not res.report.ok


def test_sampling_full_uses_averaged_oracle():
    cfg = _cfg(problem_params=(("c", "-1; 1"), ("sampling", "full")), max_iters=50)
    res = run(cfg)
    assert np.all(res.histories.idx == 0)  # no stochastic draws in full mode
    # averaged subgradient of |x+1|+|x-1| at x in (-1,1) is 0, so with
    # x0 inside the slab the momentum never moves
    res2 = run(_cfg(problem_params=(("c", "-1; 1"), ("sampling", "full")), x0=(0.5,), max_iters=20))
    assert np.all(res2.histories.m == 0.0)
    assert np.all(res2.histories.g == 0.0)


def test_decoupled_and_coupled_runs_differ():
    dec = run(_cfg(max_iters=100))
    coup = run(_cfg(stepper="adam-coupled", scheme=EstimatorScheme("adam", epsilon=1e-8), max_iters=100))
    assert not np.array_equal(dec.histories.x, coup.histories.x)


def test_q_bound_present_and_respected():
    res = run(_cfg(max_iters=2000))
    assert np.isfinite(res.q_bound)
    assert res.sup_x_norm <= res.q_bound
    # baselines skip the growth bound
    base = run(_cfg(stepper="adamw", scheme=EstimatorScheme("adam", epsilon=1e-8), max_iters=100))
    assert np.isnan(base.q_bound) or np.isinf(base.q_bound)


def test_gap_rows_are_sampled_on_schedule():
    cfg = _cfg(max_iters=100, diagnostics=DiagnosticsConfig(gap_every=40))
    res = run(cfg)
    have = np.isfinite(res.trace.stat_gap)
    assert set(res.trace.k[have].astype(int)) == {0, 40, 80, 100}


def test_force_generic_matches_dense_kernel():
    cfg = _cfg(max_iters=150)
    a = run(cfg)
    b = run(cfg, force_generic=True)
    assert np.array_equal(a.histories.x, b.histories.x)
    assert np.array_equal(a.histories.v, b.histories.v)
    assert np.array_equal(a.trace.objective, b.trace.objective)
    assert np.array_equal(a.trace.bound, b.trace.bound)


def test_relu_mlp_runs_through_generic_loop():
    cfg = _cfg(
        problem_id="relu_mlp",
        problem_params=(("data_seed", "5"),),
        max_iters=60,
        strict=False,
    )
    with warnings.catch_warnings():
        warnings.simplefilter("ignore", RuntimeWarning)
        res = run(cfg)
    assert len(res.trace) == 61
    assert np.all(np.isfinite(res.trace.objective))
