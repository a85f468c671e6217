"""The compiled kernels and the pure-Python fallback must agree bit for bit.

Every test here drives both implementations through the same inputs and
compares raw float64 payloads with array_equal (no tolerance).
"""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmdw import _backend, _purepy
from afmdw.estimators import KIND_CODES, KINDS, EstimatorScheme, v0_default

compiled = _backend.impl
HAVE_COMPILED = _backend.COMPILED

pytestmark = pytest.mark.skipif(
    not HAVE_COMPILED, reason="compiled extension unavailable; nothing to compare"
)


def _rand_state(rng, n):
    x = rng.uniform(-2.0, 2.0, n)
    m = rng.uniform(-2.0, 2.0, n)
    v = rng.uniform(0.0, 4.0, n)
    g = rng.uniform(-3.0, 3.0, n)
    return x, m, v, g


@settings(max_examples=80, deadline=None)
@given(
    kind=st.sampled_from(list(KINDS)),
    seed=st.integers(0, 2**32 - 1),
    n=st.integers(1, 7),
)
def test_step_afmdw_matches(kind, seed, n):
    rng = np.random.default_rng(seed)
    x, m, v, g = _rand_state(rng, n)
    if kind == "adamax":
        v = np.abs(v) + 0.01
    args = (0.05, 0.3, 0.25, 0.1, 0.01, 0.5, 2.0, False)
    xa, ma, va = x.copy(), m.copy(), v.copy()
    xb, mb, vb = x.copy(), m.copy(), v.copy()
    compiled.step_afmdw(KIND_CODES[kind], xa, ma, va, g, *args)
    _purepy.step_afmdw(KIND_CODES[kind], xb, mb, vb, g, *args)
    assert np.array_equal(xa, xb)
    assert np.array_equal(ma, mb)
    assert np.array_equal(va, vb)


def test_step_afmdw_literal_clamp_matches():
    rng = np.random.default_rng(5)
    x, m, v, g = _rand_state(rng, 4)
    args = (0.05, 0.3, 0.25, 0.1, 0.01, 0.5, 2.0, True)
    xa, ma, va = x.copy(), m.copy(), v.copy()
    xb, mb, vb = x.copy(), m.copy(), v.copy()
    compiled.step_afmdw(KIND_CODES["adabound"], xa, ma, va, g, *args)
    _purepy.step_afmdw(KIND_CODES["adabound"], xb, mb, vb, g, *args)
    assert np.array_equal(xa, xb) and np.array_equal(va, vb)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), n=st.integers(1, 7))
def test_step_coupled_and_adamw_match(seed, n):
    rng = np.random.default_rng(seed)
    x, m, v, g = _rand_state(rng, n)
    v = np.abs(v)
    for fn in ("step_coupled", "step_adamw"):
        xa, ma, va = x.copy(), m.copy(), v.copy()
        xb, mb, vb = x.copy(), m.copy(), v.copy()
        getattr(compiled, fn)(xa, ma, va, g, 0.1, 0.5, 0.5, 0.1, 1e-8)
        getattr(_purepy, fn)(xb, mb, vb, g, 0.1, 0.5, 0.5, 0.1, 1e-8)
        assert np.array_equal(xa, xb)
        assert np.array_equal(ma, mb)
        assert np.array_equal(va, vb)


def test_sequential_reductions_match_python_loop():
    rng = np.random.default_rng(11)
    a = rng.normal(size=257)
    b = rng.normal(size=257)
    acc = 0.0
    for t, u in zip(a.tolist(), b.tolist()):
        acc += t * u
    for impl in (compiled, _purepy):
        assert impl.dot_seq(a, b) == acc
    acc2 = 0.0
    for t in a.tolist():
        acc2 += t * t
    want = acc2 ** 0.5
    for impl in (compiled, _purepy):
        assert impl.norm_seq(a) == want


def test_residual_norm_matches():
    rng = np.random.default_rng(3)
    x = rng.normal(size=33)
    m = rng.normal(size=33)
    assert compiled.residual_norm(x, m, 0.37) == _purepy.residual_norm(x, m, 0.37)


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_oracle_eval_matches(seed):
    rng = np.random.default_rng(seed)
    x3 = rng.uniform(-2, 2, 3)
    x2 = rng.uniform(-2, 2, 2)
    x1 = rng.uniform(-2, 2, 1)
    g3 = np.empty(3)
    g2 = np.empty(2)
    g1 = np.empty(1)
    dummy1 = np.zeros((1, 1))
    dummy2 = np.zeros(1)
    c = np.array([[-1.0, 0.0, 1.0], [1.0, 0.5, -0.5]])
    a = np.array([[1.0, 0.0], [-1.0, 0.0], [0.0, 1.0]])
    b = np.array([0.0, 0.5, 0.0])
    cases = [
        (_backend.PROB_ABS1D, dummy1, dummy2, 0, x1, g1, False),
        (_backend.PROB_ABS1D, dummy1, dummy2, 0, x1, g1, True),
        (_backend.PROB_L1QUAD, c, dummy2, 1, x3, g3, False),
        (_backend.PROB_L1QUAD, c, dummy2, 0, x3, g3, True),
        (_backend.PROB_MAXPIECE, a, b, 0, x2, g2, False),
        (_backend.PROB_QUAD, dummy1, dummy2, 0, x3, g3, True),
    ]
    for prob, p1, p2, i, x, g, full in cases:
        ga = g.copy()
        gb = g.copy()
        fa = compiled.oracle_eval(prob, p1, p2, i, x, ga, full)
        fb = _purepy.oracle_eval(prob, p1, p2, i, x, gb, full)
        assert fa == fb
        assert np.array_equal(ga, gb)


def test_run_dense_matches_over_all_kinds():
    from afmdw.core import ConstantSchedule, PowerSchedule, RunConfig
    from afmdw.engine import run

    for kind in KINDS:
        if kind == "st":
            continue
        cfg = RunConfig(
            problem_id="l1quad",
            problem_params=(("c", "-1; 1"),),
            stepper="afmdw",
            scheme=EstimatorScheme(
                kind, epsilon=1.0, clamp_lo=0.5, clamp_hi=2.0,
                beta1=0.999 if kind == "adamax" else 1e-4,
            ),
            sigma=0.1,
            eta=ConstantSchedule(0.05),
            theta=PowerSchedule(0.1, 0.7),
            beta=ConstantSchedule(0.999 if kind == "adamax" else 1e-4),
            max_iters=400,
            seed=9,
            strict=False,
        )
        res_fast = run(cfg)
        res_slow = run(cfg, force_generic=True)
        assert np.array_equal(res_fast.trace.residual, res_slow.trace.residual), kind
        assert np.array_equal(res_fast.final_state.x, res_slow.final_state.x), kind


def test_backend_reports_identity():
    assert _backend.BACKEND_NAME in ("compiled", "pure-python")
    assert isinstance(_backend.COMPILED, bool)
    for name in ("step_afmdw", "step_coupled", "step_adamw", "run_dense", "oracle_eval"):
        assert hasattr(_backend, name)
