"""Tiny reverse-mode AD over an explicit computation graph.

Node kinds: input, const, add (n-ary), mul, relu, affine, square, mean.
The graph is a flat tape; operands always point at earlier nodes, so the
tape order is already a topological order.

The relu derivative at exactly 0 is taken to be RELU_SUBGRADIENT_AT_ZERO = 0,
the usual autodiff convention. That choice makes backward a selection of a
conservative gradient rather than the full subdifferential; at kinks the
returned vector lies between the one-sided gradients (tested).
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, MalformedGraph

RELU_SUBGRADIENT_AT_ZERO = 0.0


class CompGraph:
    """Builder plus tape. Node ids are indices into the tape."""

    def __init__(self, n_inputs: int):
        if n_inputs < 1:
            raise MalformedGraph("graph needs at least one input")
        self.n_inputs = n_inputs
        # each entry: (kind, operands, payload)
        self.nodes: list[tuple] = []
        self.output: int | None = None

    def _check(self, *ops: int) -> None:
        for op in ops:
            if not (0 <= op < len(self.nodes)):
                raise MalformedGraph(f"operand {op} does not reference an earlier node")

    def _push(self, kind: str, ops: tuple, payload=None) -> int:
        self.nodes.append((kind, ops, payload))
        return len(self.nodes) - 1

    def input(self, index: int) -> int:
        if not (0 <= index < self.n_inputs):
            raise MalformedGraph(f"input index {index} out of range [0, {self.n_inputs})")
        return self._push("input", (), index)

    def const(self, value: float) -> int:
        return self._push("const", (), float(value))

    def add(self, *ops: int) -> int:
        if not ops:
            raise MalformedGraph("add needs at least one operand")
        self._check(*ops)
        return self._push("add", tuple(ops))

    def mul(self, a: int, b: int) -> int:
        self._check(a, b)
        return self._push("mul", (a, b))

    def relu(self, a: int) -> int:
        self._check(a)
        return self._push("relu", (a,))

    def affine(self, bias: int, pairs) -> int:
        """bias + sum_i w_i * z_i for pairs = [(w_node, z_node), ...]."""
        flat = [bias]
        for w, z in pairs:
            flat.extend((w, z))
        self._check(*flat)
        return self._push("affine", tuple(flat))

    def square(self, a: int) -> int:
        self._check(a)
        return self._push("square", (a,))

    def mean(self, *ops: int) -> int:
        if not ops:
            raise MalformedGraph("mean needs at least one operand")
        self._check(*ops)
        return self._push("mean", tuple(ops))

    def set_output(self, node: int) -> None:
        self._check(node)
        self.output = node


def eval_graph(graph: CompGraph, x: np.ndarray) -> tuple[float, np.ndarray]:
    """Forward pass. Returns (output value, all node values)."""
    if graph.output is None:
        raise MalformedGraph("graph has no output node")
    if x.shape != (graph.n_inputs,):
        raise DimensionMismatch(f"expected input of shape ({graph.n_inputs},), got {x.shape}")
    vals = np.empty(len(graph.nodes), dtype=np.float64)
    for i, (kind, ops, payload) in enumerate(graph.nodes):
        if kind == "input":
            vals[i] = x[payload]
        elif kind == "const":
            vals[i] = payload
        elif kind == "add":
            s = 0.0
            for op in ops:
                s += vals[op]
            vals[i] = s
        elif kind == "mul":
            vals[i] = vals[ops[0]] * vals[ops[1]]
        elif kind == "relu":
            t = vals[ops[0]]
            vals[i] = t if t > 0.0 else 0.0
        elif kind == "affine":
            s = vals[ops[0]]
            for j in range(1, len(ops), 2):
                s += vals[ops[j]] * vals[ops[j + 1]]
            vals[i] = s
        elif kind == "square":
            t = vals[ops[0]]
            vals[i] = t * t
        elif kind == "mean":
            s = 0.0
            for op in ops:
                s += vals[op]
            vals[i] = s / len(ops)
        else:
            raise MalformedGraph(f"unknown node kind {kind!r}")
    return float(vals[graph.output]), vals


def ad_backward(graph: CompGraph, x: np.ndarray) -> np.ndarray:
    """Reverse-mode gradient of the output with respect to the inputs."""
    _, vals = eval_graph(graph, x)
    bars = np.zeros(len(graph.nodes), dtype=np.float64)
    bars[graph.output] = 1.0
    grad = np.zeros(graph.n_inputs, dtype=np.float64)
    for i in range(len(graph.nodes) - 1, -1, -1):
        bar = bars[i]
        if bar == 0.0:
            continue
        kind, ops, payload = graph.nodes[i]
        if kind == "input":
            grad[payload] += bar
        elif kind == "const":
            pass
        elif kind == "add":
            for op in ops:
                bars[op] += bar
        elif kind == "mul":
            a, b = ops
            bars[a] += vals[b] * bar
            bars[b] += vals[a] * bar
        elif kind == "relu":
            t = vals[ops[0]]
            if t > 0.0:
                bars[ops[0]] += bar
            elif t == 0.0:
                bars[ops[0]] += RELU_SUBGRADIENT_AT_ZERO * bar
        elif kind == "affine":
            bars[ops[0]] += bar
            for j in range(1, len(ops), 2):
                w, z = ops[j], ops[j + 1]
                bars[w] += vals[z] * bar
                bars[z] += vals[w] * bar
        elif kind == "square":
            bars[ops[0]] += 2.0 * vals[ops[0]] * bar
        elif kind == "mean":
            share = bar / len(ops)
            for op in ops:
                bars[op] += share
    return grad


def finite_difference_grad(f, x: np.ndarray, h: float = 1e-6) -> np.ndarray:
    """Central differences, one coordinate at a time."""
    x = np.asarray(x, dtype=np.float64)
    grad = np.empty_like(x)
    for i in range(x.size):
        xp = x.copy()
        xm = x.copy()
        xp[i] += h
        xm[i] -= h
        grad[i] = (f(xp) - f(xm)) / (2.0 * h)
    return grad
