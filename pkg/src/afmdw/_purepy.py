"""Pure-numpy stepping kernels: the fallback backend.

The compiled backend (_kernels.pyx) implements exactly the same arithmetic
with the same operation order, so traces are bit-identical across backends.
Keep the two files in sync expression by expression; the equivalence test
will catch drift. Dots and norms over the tiny coordinate vectors are
accumulated sequentially in Python floats rather than through BLAS, because
BLAS accumulation order is not pinned.
"""

from __future__ import annotations

import math

import numpy as np

COMPILED = False

# estimator kind codes (match estimators.KIND_CODES)
SGDW, ADAM, AMSGRAD, ADAMAX, RADAM, ADABELIEF, ADABOUND, YOGI, ST = range(9)

# stepper codes for run_dense
STEP_DECOUPLED, STEP_COUPLED, STEP_ADAMW = 0, 1, 2

# problem codes for run_dense
PROB_ABS1D, PROB_L1QUAD, PROB_MAXPIECE, PROB_QUAD = 0, 1, 2, 3


def dot_seq(a, b) -> float:
    """Sequential dot product (fixed left-to-right accumulation)."""
    s = 0.0
    la, lb = a.tolist(), b.tolist()
    for i in range(len(la)):
        s += la[i] * lb[i]
    return s


def norm_seq(a) -> float:
    return math.sqrt(dot_seq(a, a))


def residual_norm(x, m, sigma: float) -> float:
    """||sigma*x + m|| with sequential accumulation."""
    s = 0.0
    lx, lm = x.tolist(), m.tolist()
    for i in range(len(lx)):
        t = sigma * lx[i] + lm[i]
        s += t * t
    return math.sqrt(s)


def step_afmdw(kind, x, m, v, g, eta, theta, beta, sigma, epsilon, cl, cu, literal):
    """One decoupled step, in place. Order is fixed: m, then v (reads the new
    m), then x (reads the new m and v)."""
    m[:] = (1.0 - theta) * m + theta * g
    if kind in (SGDW, ADAM, RADAM, ADABOUND):
        v[:] = (1.0 - beta) * v + beta * (g * g)
    elif kind == AMSGRAD:
        v[:] = np.maximum(v, (1.0 - beta) * v + beta * (g * g))
    elif kind == ADAMAX:
        v[:] = np.maximum(beta * v, np.abs(g) + epsilon)
    elif kind == ADABELIEF:
        d = g - m
        v[:] = (1.0 - beta) * v + beta * (d * d)
    elif kind == YOGI:
        gg = g * g
        v[:] = v - beta * (np.sign(v - gg) * gg)
    elif kind == ST:
        v[:] = v - beta * (v - g * g)
    else:
        raise ValueError(f"bad kind code {kind}")

    if kind == SGDW:
        x[:] = x - eta * (m + sigma * x)
    elif kind in (ADAM, AMSGRAD, RADAM, ADABELIEF, YOGI):
        x[:] = x - eta * ((m + sigma * x) / (np.sqrt(v) + epsilon))
    elif kind == ADAMAX:
        x[:] = x - eta * ((m + sigma * x) / v)
    elif kind == ADABOUND:
        with np.errstate(divide="ignore"):
            r = 1.0 / np.sqrt(v)
        if literal:
            h = np.minimum(cl, np.maximum(cu, r))
        else:
            h = np.minimum(cu, np.maximum(cl, r))
        x[:] = x - eta * (h * (m + sigma * x))
    else:  # ST
        x[:] = x - eta * ((m + sigma * x) / np.sqrt(np.maximum(v, 0.0) + epsilon))


def step_coupled(x, m, v, g, eta, theta, beta, sigma, epsilon):
    """Coupled variant: the decay is folded into the gradient before both
    moment updates, and the x-update applies no separate decay term."""
    a = g + sigma * x
    m[:] = (1.0 - theta) * m + theta * a
    v[:] = (1.0 - beta) * v + beta * (a * a)
    x[:] = x - eta * (m / (np.sqrt(v) + epsilon))


def step_adamw(x, m, v, g, eta, theta, rho, sigma, epsilon):
    """Decay applied to x directly, outside the preconditioner."""
    dec = (eta * sigma) * x
    m[:] = (1.0 - theta) * m + theta * g
    v[:] = (1.0 - rho) * v + rho * (g * g)
    x[:] = (x - eta * (m / (np.sqrt(v) + epsilon))) - dec


def _oracle(problem_code, P1, P2, i, x, g, full):
    """Fill g with a component (or averaged) subgradient; return f(x).

    Sequential accumulation everywhere; the compiled twin mirrors it.
    """
    lx = x.tolist()
    n = len(lx)
    if problem_code == PROB_ABS1D:
        t = lx[0]
        g[0] = 1.0 if t > 0.0 else (-1.0 if t < 0.0 else 0.0)
        return abs(t)
    if problem_code == PROB_L1QUAD:
        C = P1
        N = C.shape[0]
        if full:
            for j in range(n):
                acc = 0.0
                for r in range(N):
                    d = lx[j] - C[r, j]
                    acc += 1.0 if d > 0.0 else (-1.0 if d < 0.0 else 0.0)
                g[j] = acc / N
        else:
            for j in range(n):
                d = lx[j] - C[i, j]
                g[j] = 1.0 if d > 0.0 else (-1.0 if d < 0.0 else 0.0)
        facc = 0.0
        for r in range(N):
            for j in range(n):
                facc += abs(lx[j] - C[r, j])
        return facc / N
    if problem_code == PROB_MAXPIECE:
        A, b = P1, P2
        best = -math.inf
        jstar = 0
        for r in range(A.shape[0]):
            s = 0.0
            for j in range(n):
                s += A[r, j] * lx[j]
            s += b[r]
            if s > best:
                best = s
                jstar = r
        for j in range(n):
            g[j] = A[jstar, j]
        return best
    if problem_code == PROB_QUAD:
        acc = 0.0
        for j in range(n):
            g[j] = lx[j]
            acc += lx[j] * lx[j]
        return 0.5 * acc
    raise ValueError(f"bad problem code {problem_code}")


def oracle_eval(problem_code, P1, P2, i, x, g, full) -> float:
    """Public entry for the analytic oracles; see _oracle."""
    return _oracle(problem_code, P1, P2, i, x, g, full)


def run_dense(
    stepper_code,
    kind,
    problem_code,
    P1,
    P2,
    x,
    m,
    v,
    idx,
    eta_arr,
    theta_arr,
    beta_arr,
    sigma,
    epsilon,
    cl,
    cu,
    literal,
    full_mode,
    r_out,
    gn_out,
    mn_out,
    xn_out,
    obj_out,
    xh,
    mh,
    vh,
    gh,
    record,
):
    """Dense run loop for the built-in analytic problems.

    Executes len(eta_arr) steps in place on (x, m, v), filling the per-state
    diagnostic arrays (length K+1, state after k steps at row k; gn_out[K] is
    nan because no subgradient is drawn at the final state) and, if record,
    the state histories.
    """
    K = eta_arr.shape[0]
    n = x.shape[0]
    g = np.empty(n, dtype=np.float64)
    for k in range(K):
        f = _oracle(problem_code, P1, P2, int(idx[k]), x, g, full_mode)
        r_out[k] = residual_norm(x, m, sigma)
        gn_out[k] = norm_seq(g)
        mn_out[k] = norm_seq(m)
        xsq = dot_seq(x, x)
        xn_out[k] = math.sqrt(xsq)
        obj_out[k] = f + 0.5 * sigma * xsq
        if record:
            xh[k] = x
            mh[k] = m
            vh[k] = v
            gh[k] = g
        if stepper_code == STEP_DECOUPLED:
            step_afmdw(
                kind, x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k], sigma, epsilon, cl, cu, literal
            )
        elif stepper_code == STEP_COUPLED:
            step_coupled(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k], sigma, epsilon)
        else:
            step_adamw(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k], sigma, epsilon)
    f = _oracle(problem_code, P1, P2, 0, x, g, full_mode)
    r_out[K] = residual_norm(x, m, sigma)
    gn_out[K] = math.nan
    mn_out[K] = norm_seq(m)
    xsq = dot_seq(x, x)
    xn_out[K] = math.sqrt(xsq)
    obj_out[K] = f + 0.5 * sigma * xsq
    if record:
        xh[K] = x
        mh[K] = m
        vh[K] = v
