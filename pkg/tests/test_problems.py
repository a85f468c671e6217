"""Built-in problems: oracle values by hand, sampling, and parameter parsing."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from afmdw.errors import DimensionMismatch, UnsupportedProblem
from afmdw.problems import (
    SubgradientSample,
    make_problem,
    parse_matrix,
    parse_vector,
    sample_subgradient,
)


def test_parse_matrix_and_vector():
    m = parse_matrix("-1, 0; 1, 2")
    assert m.tolist() == [[-1.0, 0.0], [1.0, 2.0]]
    v = parse_vector("1; -2, 3")
    assert v.tolist() == [1.0, -2.0, 3.0]
    with pytest.raises(DimensionMismatch):
        parse_matrix("1, 2; 3")


def test_abs1d_oracle():
    p = make_problem("abs1d")
    assert p.dim == 1 and p.n_components == 1
    assert p.m_f == 1.0 and p.noise_bound == 2.0
    assert p.eval_full(np.array([-2.5])) == 2.5
    assert p.subgrad_component(0, np.array([-2.5])).tolist() == [-1.0]
    assert p.subgrad_component(0, np.array([2.5])).tolist() == [1.0]
    assert p.subgrad_component(0, np.array([0.0])).tolist() == [0.0]  # sign(0) = 0
    assert p.full_subgradient(np.array([3.0])).tolist() == [1.0]


def test_l1quad_oracle_by_hand():
    p = make_problem("l1quad", {"c": "-1, 0; 1, 2"})
    assert p.dim == 2 and p.n_components == 2
    assert p.m_f == math.sqrt(2.0)
    x = np.array([0.0, 1.0])
    # f = ( |0-(-1)|+|1-0| + |0-1|+|1-2| ) / 2 = (2 + 2)/2
    assert p.eval_full(x) == 2.0
    assert p.eval_component(0, x) == 2.0
    assert p.eval_component(1, x) == 2.0
    # component subgradients are coordinatewise signs
    assert p.subgrad_component(0, x).tolist() == [1.0, 1.0]
    assert p.subgrad_component(1, x).tolist() == [-1.0, -1.0]
    assert p.full_subgradient(x).tolist() == [0.0, 0.0]
    # sitting exactly on an anchor coordinate selects 0 there
    assert p.subgrad_component(0, np.array([-1.0, 5.0])).tolist() == [0.0, 1.0]


def test_l1quad_dimension_cap():
    with pytest.raises(UnsupportedProblem):
        make_problem("l1quad", {"c": "1, 2, 3, 4"})


def test_maxpiece_oracle_first_argmax():
    p = make_problem("maxpiece2d", {"a": "1,0; -1,0; 0,1", "b": "0, 0, 0"})
    assert p.dim == 2 and p.n_components == 1
    assert p.m_f == 1.0
    x = np.array([2.0, 1.0])
    assert p.eval_full(x) == 2.0
    assert p.full_subgradient(x).tolist() == [1.0, 0.0]
    # tie between pieces 0 and 1 at x = (0, -1): first argmax wins
    tie = np.array([0.0, -1.0])
    assert p.eval_full(tie) == 0.0
    assert p.full_subgradient(tie).tolist() == [1.0, 0.0]
    # strictly interior winner
    top = np.array([0.0, 3.0])
    assert p.full_subgradient(top).tolist() == [0.0, 1.0]


def test_maxpiece_with_offsets():
    p = make_problem("maxpiece2d", {"a": "1,0; -1,0", "b": "0, 0.5"})
    x = np.array([0.1, 0.0])
    # pieces: 0.1 and -0.1+0.5 = 0.4
    assert p.eval_full(x) == 0.4
    assert p.full_subgradient(x).tolist() == [-1.0, 0.0]


def test_quad_oracle():
    p = make_problem("quad", {"dim": "4"})
    assert p.dim == 4
    assert math.isinf(p.m_f)
    x = np.array([1.0, -2.0, 0.5, 0.0])
    assert p.eval_full(x) == 0.5 * (1.0 + 4.0 + 0.25)
    assert p.full_subgradient(x).tolist() == x.tolist()


def test_relu_mlp_dataset_and_shapes():
    p = make_problem("relu_mlp", {"data_seed": "77"})
    assert p.dim == 17
    assert p.n_components == 32
    assert p.inputs.shape == (32, 2)
    assert p.targets.shape == (32,)
    q = make_problem("relu_mlp", {"data_seed": "77"})
    assert np.array_equal(p.inputs, q.inputs)
    assert np.array_equal(p.targets, q.targets)
    r = make_problem("relu_mlp", {"data_seed": "78"})
    assert not np.array_equal(p.inputs, r.inputs)


def test_relu_mlp_component_matches_numpy_forward():
    p = make_problem("relu_mlp")
    rng = np.random.default_rng(0)
    for i in (0, 7, 31):
        x = rng.uniform(-1.0, 1.0, 17)
        pred = p.predict(x, p.inputs[i])
        want = (pred - p.targets[i]) ** 2
        assert p.eval_component(i, x) == pytest.approx(want, rel=1e-12)


def test_relu_mlp_full_is_component_mean():
    p = make_problem("relu_mlp")
    rng = np.random.default_rng(1)
    x = rng.uniform(-1.0, 1.0, 17)
    acc = 0.0
    for i in range(p.n_components):
        acc += p.eval_component(i, x)
    assert p.eval_full(x) == pytest.approx(acc / 32.0, rel=1e-15)
    gs = np.zeros(17)
    for i in range(p.n_components):
        gs += p.subgrad_component(i, x)
    assert np.allclose(p.full_subgradient(x), gs / 32.0, rtol=1e-13, atol=0)


def test_relu_mlp_sampled_bound_is_flagged_estimate():
    p = make_problem("relu_mlp")
    assert p.bounds_exact is False
    assert 0.0 < p.m_f < math.inf
    assert p.m_f == p.m_f  # cached, stable


def test_make_problem_rejects_unknown_id():
    with pytest.raises(UnsupportedProblem):
        make_problem("rosenbrock")


def test_make_problem_tolerates_extra_params():
    p = make_problem("abs1d", {"sampling": "full"})
    assert p.problem_id == "abs1d"


def test_sample_subgradient_is_uniform_and_reproducible():
    p = make_problem("l1quad", {"c": "-1; 0; 1"})
    x = np.array([0.3])
    s1 = sample_subgradient(p, x, np.random.default_rng(42))
    s2 = sample_subgradient(p, x, np.random.default_rng(42))
    assert isinstance(s1, SubgradientSample)
    assert s1.component_index == s2.component_index
    assert np.array_equal(s1.g, s2.g)
    assert np.array_equal(s1.x_at_draw, x)
    counts = np.zeros(3)
    rng = np.random.default_rng(7)
    for _ in range(600):
        counts[sample_subgradient(p, x, rng).component_index] += 1
    assert np.all(counts > 120)  # all three components get drawn


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 2**32 - 1))
def test_component_subgradients_respect_m_f(seed):
    rng = np.random.default_rng(seed)
    for pid, params in [
        ("abs1d", {}),
        ("l1quad", {"c": "-1, 0; 1, 2"}),
        ("maxpiece2d", {"a": "1,0; -1,0; 0,1", "b": "0, 0, 0"}),
    ]:
        p = make_problem(pid, params)
        x = rng.uniform(-3.0, 3.0, p.dim)
        for i in range(p.n_components):
            g = p.subgrad_component(i, x)
            assert np.linalg.norm(g) <= p.m_f + 1e-15
        assert np.linalg.norm(p.full_subgradient(x)) <= p.m_f + 1e-15


def test_dimension_checks_raise():
    p = make_problem("abs1d")
    with pytest.raises(DimensionMismatch):
        p.eval_full(np.array([1.0, 2.0]))
    with pytest.raises(DimensionMismatch):
        p.subgrad_component(3, np.array([1.0]))
