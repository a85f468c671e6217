"""Estimator catalog: frozen single-step oracles, preconditioner ranges,
and certificate properties under random bounded gradient streams."""

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmdw.errors import ConfigError
from afmdw.estimators import (
    KIND_CODES,
    KINDS,
    EstimatorScheme,
    bound_certificate,
    precondition,
    update_estimator,
    v0_default,
)

V = np.array([0.5])
G = np.array([2.0])
M_NEXT = np.array([1.25])


def upd(kind, v=V, g=G, m_next=M_NEXT, b=0.5, **kw):
    scheme = EstimatorScheme(kind, beta1=0.25, **kw)
    return update_estimator(scheme, np.asarray(v, float), np.asarray(g, float),
                            np.asarray(m_next, float), beta1=b)


# single-step oracles, recomputed by the literal formulas


def test_ewma_family_update():
    # (1-b)v + b g^2 = 0.5*0.5 + 0.5*4 = 2.25
    for kind in ("sgdw", "adam", "radam", "adabound"):
        assert upd(kind)[0] == 0.5 * 0.5 + 0.5 * 4.0


def test_amsgrad_update_is_running_max():
    assert upd("amsgrad")[0] == 2.25  # ewma wins
    assert upd("amsgrad", v=[5.0])[0] == 5.0  # old max wins


def test_adamax_update():
    out = upd("adamax", epsilon=0.01)
    assert out[0] == max(0.5 * 0.5, 2.0 + 0.01)
    out = upd("adamax", v=[100.0], epsilon=0.01)
    assert out[0] == 0.5 * 100.0


def test_adabelief_update_centers_on_momentum():
    d = 2.0 - 1.25
    assert upd("adabelief")[0] == 0.5 * 0.5 + 0.5 * d * d


def test_yogi_update_sign_cases():
    assert upd("yogi", v=[0.5])[0] == 0.5 + 0.5 * 4.0  # v < g^2: move up
    assert upd("yogi", v=[5.0])[0] == 5.0 - 0.5 * 4.0  # v > g^2: move down
    assert upd("yogi", v=[4.0])[0] == 4.0  # sign(0) = 0: stay put


def test_st_update():
    assert upd("st")[0] == 0.5 - 0.5 * (0.5 - 4.0)


def test_update_does_not_mutate_inputs():
    v = np.array([1.0, 2.0])
    g = np.array([3.0, -1.0])
    m = np.array([0.5, 0.5])
    for kind in KINDS:
        scheme = EstimatorScheme(kind, epsilon=0.5)
        out = update_estimator(scheme, v, g, m, beta1=0.5)
        assert out is not v
    assert v.tolist() == [1.0, 2.0]
    assert g.tolist() == [3.0, -1.0]


# preconditioners


def test_precondition_sgdw_is_identity_scaling():
    h = precondition(EstimatorScheme("sgdw"), np.array([0.3, 7.0]))
    assert h.tolist() == [1.0, 1.0]


def test_precondition_sqrt_family():
    scheme = EstimatorScheme("adam", epsilon=0.25)
    h = precondition(scheme, np.array([4.0]))
    assert h[0] == 1.0 / (2.0 + 0.25)


def test_precondition_adamax_is_reciprocal_and_rejects_nonpositive():
    scheme = EstimatorScheme("adamax")
    assert precondition(scheme, np.array([4.0]))[0] == 0.25
    with pytest.raises(ConfigError):
        precondition(scheme, np.array([0.0]))


def test_precondition_adabound_standard_clamp():
    scheme = EstimatorScheme("adabound", clamp_lo=0.5, clamp_hi=2.0)
    v = np.array([100.0, 1.0, 1e-6, 0.0])
    h = precondition(scheme, v)
    # 1/sqrt(v) = 0.1, 1, 1000, inf -> clamped to [0.5, 2]
    assert h.tolist() == [0.5, 1.0, 2.0, 2.0]


def test_precondition_adabound_literal_clamp_collapses():
    # min(lo, max(hi, r)) = lo whenever lo < hi, the printed form verbatim
    scheme = EstimatorScheme("adabound", clamp_lo=0.5, clamp_hi=2.0, literal_clamp=True)
    h = precondition(scheme, np.array([100.0, 1.0, 1e-6]))
    assert h.tolist() == [0.5, 0.5, 0.5]


def test_precondition_st_clips_negative_v():
    scheme = EstimatorScheme("st", epsilon=0.04)
    h = precondition(scheme, np.array([-3.0, 0.0]))
    assert h[0] == 1.0 / np.sqrt(0.04)
    assert h[1] == 1.0 / np.sqrt(0.04)


# certificates


def test_certificates_match_catalog():
    eps = 0.5
    m_f, m_xi = 3.0, 0.0
    assert bound_certificate(EstimatorScheme("sgdw"), m_f, m_xi) == (1.0, 1.0)
    for kind in ("adam", "amsgrad", "radam", "yogi"):
        cert = bound_certificate(EstimatorScheme(kind, epsilon=eps), m_f, m_xi)
        assert cert == (1.0 / 3.5, 2.0)
    assert bound_certificate(EstimatorScheme("adamax", epsilon=eps), m_f, m_xi) == (
        1.0 / 9.5,
        2.0,
    )
    assert bound_certificate(EstimatorScheme("adabelief", epsilon=eps), m_f, m_xi) == (
        1.0 / 6.5,
        2.0,
    )
    assert bound_certificate(
        EstimatorScheme("adabound", clamp_lo=0.5, clamp_hi=2.0), m_f, m_xi
    ) == (0.5, 2.0)
    lo, hi = bound_certificate(EstimatorScheme("st", epsilon=eps), m_f, m_xi)
    assert lo == 1.0 / np.sqrt(9.5)
    assert hi == 1.0 / np.sqrt(0.5)


def test_certificate_splits_oracle_and_noise_bounds():
    a = bound_certificate(EstimatorScheme("adam", epsilon=1.0), 2.0, 1.0)
    b = bound_certificate(EstimatorScheme("adam", epsilon=1.0), 3.0, 0.0)
    assert a == b


@settings(max_examples=60, deadline=None)
@given(
    kind=st.sampled_from([k for k in KINDS if k not in ("st", "yogi")]),
    seed=st.integers(0, 2**32 - 1),
    b=st.floats(1e-4, 0.9999),
)
def test_certificate_holds_along_bounded_streams(kind, seed, b):
    """H(v_k) stays inside [eps_v, M_v] for any stream with |g| <= M.

    M >= 1 throughout; the adamax lower certificate is only sound there.
    Yogi gets its own test below because its v-update can overshoot M^2.
    """
    m_bound = 3.0
    scheme = EstimatorScheme(kind, epsilon=1.0, clamp_lo=0.5, clamp_hi=2.0)
    eps_v, m_v = bound_certificate(scheme, m_bound, 0.0)
    rng = np.random.default_rng(seed)
    v = v0_default(scheme, 4)
    m = np.zeros(4)
    slack = 4 * np.finfo(np.float64).eps
    for k in range(200):
        g = rng.uniform(-m_bound, m_bound, size=4)
        theta = 0.1 / (k + 1.0) ** 0.7
        m = (1.0 - theta) * m + theta * g
        v = update_estimator(scheme, v, g, m, beta1=b)
        h = precondition(scheme, v)
        assert np.all(h >= eps_v * (1.0 - slack))
        assert np.all(h <= m_v * (1.0 + slack))


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), b=st.floats(1e-4, 0.9999))
def test_yogi_certificate_holds_up_to_overshoot(seed, b):
    """Yogi can push v past M^2 by one b*g^2 increment (at most a (1+b)
    factor), so the sound elementwise range is [1/(M*sqrt(1+b)+eps), 1/eps].
    The catalog value assumes the overshoot-free regime; the stream tests in
    the acceptance suite run at small b where the gap never materializes.
    """
    m_bound = 3.0
    scheme = EstimatorScheme("yogi", epsilon=1.0)
    eps_v, m_v = bound_certificate(scheme, m_bound, 0.0)
    sound_lo = 1.0 / (m_bound * np.sqrt(1.0 + b) + scheme.epsilon)
    assert sound_lo <= eps_v
    rng = np.random.default_rng(seed)
    v = np.zeros(4)
    m = np.zeros(4)
    slack = 4 * np.finfo(np.float64).eps
    for k in range(200):
        g = rng.uniform(-m_bound, m_bound, size=4)
        theta = 0.1 / (k + 1.0) ** 0.7
        m = (1.0 - theta) * m + theta * g
        v = update_estimator(scheme, v, g, m, beta1=b)
        h = precondition(scheme, v)
        assert np.all(h >= sound_lo * (1.0 - slack))
        assert np.all(h <= m_v * (1.0 + slack))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), b=st.floats(1e-3, 0.5))
def test_st_certificate_holds(seed, b):
    m_bound = 3.0
    scheme = EstimatorScheme("st", epsilon=1.0)
    eps_v, m_v = bound_certificate(scheme, m_bound, 0.0)
    rng = np.random.default_rng(seed)
    v = np.zeros(4)
    slack = 4 * np.finfo(np.float64).eps
    for _ in range(200):
        g = rng.uniform(-m_bound, m_bound, size=4)
        v = update_estimator(scheme, v, g, g, beta1=b)
        h = precondition(scheme, v)
        assert np.all(h >= eps_v * (1.0 - slack))
        assert np.all(h <= m_v * (1.0 + slack))


@settings(max_examples=40, deadline=None)
@given(
    kind=st.sampled_from(list(KINDS)),
    seed=st.integers(0, 2**32 - 1),
)
def test_updates_preserve_finiteness(kind, seed):
    scheme = EstimatorScheme(kind, epsilon=0.01)
    rng = np.random.default_rng(seed)
    v = v0_default(scheme, 3)
    for _ in range(50):
        g = rng.normal(size=3)
        m = rng.normal(size=3)
        v = update_estimator(scheme, v, g, m, beta1=0.3)
        assert np.all(np.isfinite(v))


# scheme plumbing


def test_kind_codes_are_stable_and_distinct():
    assert len(set(KIND_CODES.values())) == len(KINDS)
    assert KIND_CODES["sgdw"] == 0
    for kind in KINDS:
        assert EstimatorScheme(kind).code == KIND_CODES[kind]


def test_v0_default():
    scheme = EstimatorScheme("adamax", epsilon=0.125)
    assert v0_default(scheme, 3).tolist() == [0.125, 0.125, 0.125]
    assert v0_default(EstimatorScheme("adam"), 2).tolist() == [0.0, 0.0]


def test_scheme_rejects_bad_parameters():
    with pytest.raises(ConfigError):
        EstimatorScheme("nadam")
    with pytest.raises(ConfigError):
        EstimatorScheme("adam", beta1=0.0)
    with pytest.raises(ConfigError):
        EstimatorScheme("adam", beta1=1.0)
    with pytest.raises(ConfigError):
        EstimatorScheme("adam", epsilon=0.0)
    with pytest.raises(ConfigError):
        EstimatorScheme("adabound", clamp_lo=2.0, clamp_hi=1.0)
