"""Built-in finite-sum problems f(x) = (1/N) sum_i f_i(x).

Each problem exposes component values, one conservative-field subgradient
selection per component, and the averaged selection. The analytic problems
(abs1d, l1quad, maxpiece2d, quad) are mirrored by the backend kernels and
delegate to them so the generic and dense run loops agree bitwise; relu_mlp
goes through the reverse-mode graph in autodiff.

Selection rules at kinks: sign(0) = 0 for absolute values, first argmax for
the max of affine pieces, relu'(0) = 0 inside the network. Problems are
immutable after construction.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .autodiff import CompGraph, ad_backward, eval_graph
from .errors import DimensionMismatch, UnsupportedProblem

PROBLEM_IDS = ("abs1d", "l1quad", "maxpiece2d", "quad", "relu_mlp")

_DUMMY_P1 = np.zeros((1, 1), dtype=np.float64)
_DUMMY_P2 = np.zeros(1, dtype=np.float64)


@dataclass(frozen=True)
class SubgradientSample:
    """One stochastic oracle draw: g = subgrad_component(i, x) exactly."""

    g: np.ndarray
    component_index: int
    x_at_draw: np.ndarray


def parse_matrix(text: str) -> np.ndarray:
    """Rows separated by ';', entries by ','. Always 2-d."""
    rows = [r for r in (part.strip() for part in text.split(";")) if r]
    data = [[float(e) for e in row.split(",")] for row in rows]
    width = len(data[0])
    if any(len(row) != width for row in data):
        raise DimensionMismatch(f"ragged matrix literal: {text!r}")
    return np.array(data, dtype=np.float64)


def parse_vector(text: str) -> np.ndarray:
    return np.array([float(e) for e in text.replace(";", ",").split(",")], dtype=np.float64)


class FiniteSumProblem:
    """Base class. Subclasses fill the descriptive fields in __init__.

    m_f is sup over i and x of the component subgradient norm (math.inf when
    unbounded, an estimate when bounds_exact is False). growth_nu/growth_l
    describe the norm growth ||D_f(x)|| <= L(1 + ||x||^nu) with nu in [0,1),
    or are None when no such bound is known.
    """

    problem_id: str = "?"
    dim: int = 0
    n_components: int = 0
    m_f: float = math.inf
    bounds_exact: bool = True
    growth_nu: float | None = None
    growth_l: float | None = None
    # backend kernel mirror; None means only the generic loop applies
    kernel_code: int | None = None
    kernel_p1: np.ndarray = _DUMMY_P1
    kernel_p2: np.ndarray = _DUMMY_P2
    # piecewise structure used by exact stationarity oracles
    structure: str | None = None

    def _check(self, x: np.ndarray) -> np.ndarray:
        x = np.ascontiguousarray(x, dtype=np.float64)
        if x.shape != (self.dim,):
            raise DimensionMismatch(f"{self.problem_id} expects dim {self.dim}, got shape {x.shape}")
        return x

    @property
    def noise_bound(self) -> float:
        """Bound on the single-sample noise g - d (martingale difference)."""
        return 2.0 * self.m_f

    def eval_component(self, i: int, x: np.ndarray) -> float:
        raise NotImplementedError

    def subgrad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        raise NotImplementedError

    def eval_full(self, x: np.ndarray) -> float:
        x = self._check(x)
        acc = 0.0
        for i in range(self.n_components):
            acc += self.eval_component(i, x)
        return acc / self.n_components

    def full_subgradient(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        acc = np.zeros(self.dim, dtype=np.float64)
        for i in range(self.n_components):
            acc += self.subgrad_component(i, x)
        return acc / self.n_components


class _KernelProblem(FiniteSumProblem):
    """Analytic problem whose oracle lives in the backend kernels."""

    def subgrad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        if not (0 <= i < self.n_components):
            raise DimensionMismatch(f"component {i} out of range [0, {self.n_components})")
        g = np.empty(self.dim, dtype=np.float64)
        _backend.oracle_eval(self.kernel_code, self.kernel_p1, self.kernel_p2, i, x, g, False)
        return g

    def eval_full(self, x: np.ndarray) -> float:
        x = self._check(x)
        g = np.empty(self.dim, dtype=np.float64)
        return _backend.oracle_eval(self.kernel_code, self.kernel_p1, self.kernel_p2, 0, x, g, False)

    def full_subgradient(self, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        g = np.empty(self.dim, dtype=np.float64)
        _backend.oracle_eval(self.kernel_code, self.kernel_p1, self.kernel_p2, 0, x, g, True)
        return g


class Abs1D(_KernelProblem):
    """f(x) = |x| on the line; the canonical sharp minimum at 0."""

    def __init__(self):
        self.problem_id = "abs1d"
        self.dim = 1
        self.n_components = 1
        self.m_f = 1.0
        self.bounds_exact = True
        self.growth_nu = 0.0
        self.growth_l = 1.0
        self.kernel_code = _backend.impl.PROB_ABS1D
        self.kernel_p1 = _DUMMY_P1
        self.kernel_p2 = _DUMMY_P2
        self.structure = "separable-l1"
        self.kinks = np.zeros((1, 1), dtype=np.float64)

    def eval_component(self, i: int, x: np.ndarray) -> float:
        x = self._check(x)
        return abs(float(x[0]))


class L1Quad(_KernelProblem):
    """f_i(x) = ||x - c_i||_1 with anchors c_i as the rows of c (n <= 3)."""

    def __init__(self, c: np.ndarray):
        c = np.ascontiguousarray(c, dtype=np.float64)
        if c.ndim != 2:
            raise DimensionMismatch("l1quad anchors must be a 2-d array")
        if c.shape[1] > 3:
            raise UnsupportedProblem(f"l1quad supports dim <= 3, got {c.shape[1]}")
        self.problem_id = "l1quad"
        self.dim = int(c.shape[1])
        self.n_components = int(c.shape[0])
        # each component subgradient has entries in {-1, 0, 1}
        self.m_f = math.sqrt(self.dim)
        self.bounds_exact = True
        self.growth_nu = 0.0
        self.growth_l = self.m_f
        self.c = c
        self.kernel_code = _backend.impl.PROB_L1QUAD
        self.kernel_p1 = c
        self.kernel_p2 = _DUMMY_P2
        self.structure = "separable-l1"
        self.kinks = c

    def eval_component(self, i: int, x: np.ndarray) -> float:
        x = self._check(x)
        acc = 0.0
        for j in range(self.dim):
            acc += abs(float(x[j]) - self.c[i, j])
        return acc


class MaxPiece2D(_KernelProblem):
    """f(x) = max_r (a_r . x + b_r), a single component (N = 1)."""

    def __init__(self, a: np.ndarray, b: np.ndarray):
        a = np.ascontiguousarray(a, dtype=np.float64)
        b = np.ascontiguousarray(b, dtype=np.float64)
        if a.ndim != 2 or a.shape[1] != 2:
            raise DimensionMismatch("maxpiece2d needs pieces with 2 coefficients each")
        if b.shape != (a.shape[0],):
            raise DimensionMismatch("maxpiece2d offsets must match the piece count")
        self.problem_id = "maxpiece2d"
        self.dim = 2
        self.n_components = 1
        self.m_f = max(math.sqrt(float(a[r, 0]) ** 2 + float(a[r, 1]) ** 2) for r in range(a.shape[0]))
        self.bounds_exact = True
        self.growth_nu = 0.0
        self.growth_l = self.m_f
        self.a = a
        self.b = b
        self.kernel_code = _backend.impl.PROB_MAXPIECE
        self.kernel_p1 = a
        self.kernel_p2 = b
        self.structure = "max-affine"

    def eval_component(self, i: int, x: np.ndarray) -> float:
        return self.eval_full(x)


class Quad(_KernelProblem):
    """Smooth f(x) = ||x||^2 / 2; gradient grows linearly, so m_f = inf."""

    def __init__(self, dim: int):
        if dim < 1:
            raise DimensionMismatch("quad needs dim >= 1")
        self.problem_id = "quad"
        self.dim = int(dim)
        self.n_components = 1
        self.m_f = math.inf
        self.bounds_exact = True
        self.growth_nu = None
        self.growth_l = None
        self.kernel_code = _backend.impl.PROB_QUAD
        self.kernel_p1 = _DUMMY_P1
        self.kernel_p2 = _DUMMY_P2
        self.structure = "smooth-quad"

    def eval_component(self, i: int, x: np.ndarray) -> float:
        return self.eval_full(x)


class ReluMLP(FiniteSumProblem):
    """Squared loss of a 2-4-1 ReLU network on a fixed synthetic dataset.

    f_i(x) = (net(x; u_i) - t_i)^2 where x packs the parameters as
    [W1 rows (8), b1 (4), W2 (4), b2 (1)], dim 17. The dataset (32 points,
    inputs and targets uniform on [-1, 1]) is generated from data_seed, so
    it is reproducible bit-exactly. Subgradients come from reverse-mode
    passes over the per-component graphs.

    m_f is a sampled estimate over the box ||x||_inf <= 10 times a safety
    factor 2, flagged via bounds_exact = False.
    """

    N_HIDDEN = 4
    N_DATA = 32
    BOX_HALF_WIDTH = 10.0
    SAFETY_FACTOR = 2.0

    def __init__(self, data_seed: int = 1234):
        self.problem_id = "relu_mlp"
        self.dim = 17
        self.n_components = self.N_DATA
        self.bounds_exact = False
        self.growth_nu = None
        self.growth_l = None
        self.kernel_code = None
        self.structure = None
        self.data_seed = int(data_seed)
        rng = np.random.default_rng(self.data_seed)
        self.inputs = rng.uniform(-1.0, 1.0, size=(self.N_DATA, 2))
        self.targets = rng.uniform(-1.0, 1.0, size=self.N_DATA)
        self._graphs = [self._build_component(i) for i in range(self.N_DATA)]
        self._m_f_cache: float | None = None

    def _build_component(self, i: int) -> CompGraph:
        g = CompGraph(self.dim)
        w1 = [[g.input(h * 2 + j) for j in range(2)] for h in range(self.N_HIDDEN)]
        b1 = [g.input(8 + h) for h in range(self.N_HIDDEN)]
        w2 = [g.input(12 + h) for h in range(self.N_HIDDEN)]
        b2 = g.input(16)
        u = [g.const(self.inputs[i, j]) for j in range(2)]
        hidden = []
        for h in range(self.N_HIDDEN):
            pre = g.affine(b1[h], [(w1[h][j], u[j]) for j in range(2)])
            hidden.append(g.relu(pre))
        out = g.affine(b2, [(w2[h], hidden[h]) for h in range(self.N_HIDDEN)])
        err = g.add(out, g.const(-self.targets[i]))
        g.set_output(g.square(err))
        return g

    @property
    def m_f(self) -> float:  # type: ignore[override]
        if self._m_f_cache is None:
            rng = np.random.default_rng(self.data_seed * 2 + 1)
            worst = 0.0
            for _ in range(200):
                x = rng.uniform(-self.BOX_HALF_WIDTH, self.BOX_HALF_WIDTH, size=self.dim)
                for i in rng.integers(0, self.N_DATA, size=4):
                    worst = max(worst, float(np.linalg.norm(ad_backward(self._graphs[i], x))))
            self._m_f_cache = self.SAFETY_FACTOR * worst
        return self._m_f_cache

    def predict(self, x: np.ndarray, u: np.ndarray) -> float:
        """Plain numpy forward pass, kept as an independent cross-check."""
        x = self._check(x)
        w1 = x[0:8].reshape(self.N_HIDDEN, 2)
        b1 = x[8:12]
        w2 = x[12:16]
        b2 = x[16]
        hidden = np.maximum(w1 @ u + b1, 0.0)
        return float(w2 @ hidden + b2)

    def eval_component(self, i: int, x: np.ndarray) -> float:
        x = self._check(x)
        value, _ = eval_graph(self._graphs[i], x)
        return value

    def subgrad_component(self, i: int, x: np.ndarray) -> np.ndarray:
        x = self._check(x)
        if not (0 <= i < self.n_components):
            raise DimensionMismatch(f"component {i} out of range [0, {self.n_components})")
        return ad_backward(self._graphs[i], x)


def make_problem(problem_id: str, params: dict[str, str] | None = None) -> FiniteSumProblem:
    """Instantiate a built-in problem from its id and string parameters."""
    params = dict(params or {})
    if problem_id == "abs1d":
        return Abs1D()
    if problem_id == "l1quad":
        c = parse_matrix(params.get("c", "-1; 1"))
        return L1Quad(c)
    if problem_id == "maxpiece2d":
        a = parse_matrix(params.get("a", "1,0; -1,0; 0,1"))
        b = parse_vector(params.get("b", "0, 0, 0"))
        return MaxPiece2D(a, b)
    if problem_id == "quad":
        return Quad(int(params.get("dim", "3")))
    if problem_id == "relu_mlp":
        return ReluMLP(int(params.get("data_seed", "1234")))
    raise UnsupportedProblem(f"unknown problem id {problem_id!r}; known: {', '.join(PROBLEM_IDS)}")


def sample_subgradient(problem: FiniteSumProblem, x: np.ndarray, rng: np.random.Generator) -> SubgradientSample:
    """Draw i uniformly and return that component's selection at x."""
    i = int(rng.integers(0, problem.n_components))
    g = problem.subgrad_component(i, x)
    return SubgradientSample(g=g, component_index=i, x_at_draw=np.array(x, dtype=np.float64))


def full_subgradient(problem: FiniteSumProblem, x: np.ndarray) -> np.ndarray:
    """The averaged selection (1/N) sum_i subgrad_component(i, x)."""
    return problem.full_subgradient(x)
