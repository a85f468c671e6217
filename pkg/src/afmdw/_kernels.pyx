# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled stepping kernels.

Expression-by-expression twin of ``_purepy``; both must produce bit-identical
results (the extension is built with -ffp-contract=off so no fused
multiply-adds change the rounding). Any edit here needs the same edit there.
"""

import numpy as np

cimport numpy as cnp
from libc.math cimport fabs, sqrt, NAN, INFINITY

COMPILED = True

# estimator kind codes (match estimators.KIND_CODES)
SGDW, ADAM, AMSGRAD, ADAMAX, RADAM, ADABELIEF, ADABOUND, YOGI, ST = range(9)

STEP_DECOUPLED, STEP_COUPLED, STEP_ADAMW = 0, 1, 2
PROB_ABS1D, PROB_L1QUAD, PROB_MAXPIECE, PROB_QUAD = 0, 1, 2, 3

cdef enum:
    C_SGDW = 0
    C_ADAM = 1
    C_AMSGRAD = 2
    C_ADAMAX = 3
    C_RADAM = 4
    C_ADABELIEF = 5
    C_ADABOUND = 6
    C_YOGI = 7
    C_ST = 8


cdef inline double _sgn(double t) nogil:
    if t > 0.0:
        return 1.0
    elif t < 0.0:
        return -1.0
    return 0.0


cdef void _step_afmdw(int kind, double[::1] x, double[::1] m, double[::1] v,
                      double[::1] g, double eta, double theta, double beta,
                      double sigma, double epsilon, double cl, double cu,
                      bint literal) nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double d, gg, s, r, h, cand
    for i in range(n):
        m[i] = (1.0 - theta) * m[i] + theta * g[i]
    if kind == C_SGDW or kind == C_ADAM or kind == C_RADAM or kind == C_ADABOUND:
        for i in range(n):
            v[i] = (1.0 - beta) * v[i] + beta * (g[i] * g[i])
    elif kind == C_AMSGRAD:
        for i in range(n):
            cand = (1.0 - beta) * v[i] + beta * (g[i] * g[i])
            v[i] = v[i] if v[i] > cand else cand
    elif kind == C_ADAMAX:
        for i in range(n):
            cand = fabs(g[i]) + epsilon
            d = beta * v[i]
            v[i] = d if d > cand else cand
    elif kind == C_ADABELIEF:
        for i in range(n):
            d = g[i] - m[i]
            v[i] = (1.0 - beta) * v[i] + beta * (d * d)
    elif kind == C_YOGI:
        for i in range(n):
            gg = g[i] * g[i]
            s = _sgn(v[i] - gg)
            v[i] = v[i] - beta * (s * gg)
    else:  # C_ST
        for i in range(n):
            v[i] = v[i] - beta * (v[i] - g[i] * g[i])

    if kind == C_SGDW:
        for i in range(n):
            x[i] = x[i] - eta * (m[i] + sigma * x[i])
    elif kind == C_ADAM or kind == C_AMSGRAD or kind == C_RADAM or kind == C_ADABELIEF or kind == C_YOGI:
        for i in range(n):
            x[i] = x[i] - eta * ((m[i] + sigma * x[i]) / (sqrt(v[i]) + epsilon))
    elif kind == C_ADAMAX:
        for i in range(n):
            x[i] = x[i] - eta * ((m[i] + sigma * x[i]) / v[i])
    elif kind == C_ADABOUND:
        for i in range(n):
            if v[i] == 0.0:
                r = INFINITY
            else:
                r = 1.0 / sqrt(v[i])
            if literal:
                h = r if r > cu else cu
                h = h if h < cl else cl
            else:
                h = r if r > cl else cl
                h = h if h < cu else cu
            x[i] = x[i] - eta * (h * (m[i] + sigma * x[i]))
    else:  # C_ST
        for i in range(n):
            d = v[i] if v[i] > 0.0 else 0.0
            x[i] = x[i] - eta * ((m[i] + sigma * x[i]) / sqrt(d + epsilon))


cdef void _step_coupled(double[::1] x, double[::1] m, double[::1] v, double[::1] g,
                        double eta, double theta, double beta, double sigma,
                        double epsilon) nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double a
    for i in range(n):
        a = g[i] + sigma * x[i]
        m[i] = (1.0 - theta) * m[i] + theta * a
        v[i] = (1.0 - beta) * v[i] + beta * (a * a)
        x[i] = x[i] - eta * (m[i] / (sqrt(v[i]) + epsilon))


cdef void _step_adamw(double[::1] x, double[::1] m, double[::1] v, double[::1] g,
                      double eta, double theta, double rho, double sigma,
                      double epsilon) nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double c = eta * sigma
    cdef double dec
    for i in range(n):
        dec = c * x[i]
        m[i] = (1.0 - theta) * m[i] + theta * g[i]
        v[i] = (1.0 - rho) * v[i] + rho * (g[i] * g[i])
        x[i] = (x[i] - eta * (m[i] / (sqrt(v[i]) + epsilon))) - dec


def step_afmdw(kind, double[::1] x, double[::1] m, double[::1] v, double[::1] g,
               double eta, double theta, double beta, double sigma,
               double epsilon, double cl, double cu, literal):
    _step_afmdw(<int> kind, x, m, v, g, eta, theta, beta, sigma, epsilon, cl, cu,
                <bint> bool(literal))


def step_coupled(double[::1] x, double[::1] m, double[::1] v, double[::1] g,
                 double eta, double theta, double beta, double sigma, double epsilon):
    _step_coupled(x, m, v, g, eta, theta, beta, sigma, epsilon)


def step_adamw(double[::1] x, double[::1] m, double[::1] v, double[::1] g,
               double eta, double theta, double rho, double sigma, double epsilon):
    _step_adamw(x, m, v, g, eta, theta, rho, sigma, epsilon)


cdef double _oracle(int problem_code, double[:, ::1] P1, double[::1] P2,
                    Py_ssize_t comp, double[::1] x, double[::1] g, bint full) nogil:
    cdef Py_ssize_t j, r, n = x.shape[0], N
    cdef double t, acc, facc, s, best
    cdef Py_ssize_t jstar
    if problem_code == 0:  # abs1d
        t = x[0]
        g[0] = _sgn(t)
        return fabs(t)
    if problem_code == 1:  # l1quad
        N = P1.shape[0]
        if full:
            for j in range(n):
                acc = 0.0
                for r in range(N):
                    acc += _sgn(x[j] - P1[r, j])
                g[j] = acc / N
        else:
            for j in range(n):
                g[j] = _sgn(x[j] - P1[comp, j])
        facc = 0.0
        for r in range(N):
            for j in range(n):
                facc += fabs(x[j] - P1[r, j])
        return facc / N
    if problem_code == 2:  # maxpiece
        best = -INFINITY
        jstar = 0
        for r in range(P1.shape[0]):
            s = 0.0
            for j in range(n):
                s += P1[r, j] * x[j]
            s += P2[r]
            if s > best:
                best = s
                jstar = r
        for j in range(n):
            g[j] = P1[jstar, j]
        return best
    # quad
    acc = 0.0
    for j in range(n):
        g[j] = x[j]
        acc += x[j] * x[j]
    return 0.5 * acc


cdef inline double _residual(double[::1] x, double[::1] m, double sigma) nogil:
    cdef Py_ssize_t i, n = x.shape[0]
    cdef double s = 0.0, t
    for i in range(n):
        t = sigma * x[i] + m[i]
        s += t * t
    return sqrt(s)


cdef inline double _dot(double[::1] a, double[::1] b) nogil:
    cdef Py_ssize_t i, n = a.shape[0]
    cdef double s = 0.0
    for i in range(n):
        s += a[i] * b[i]
    return s


def residual_norm(double[::1] x, double[::1] m, double sigma):
    return _residual(x, m, sigma)


def oracle_eval(problem_code, double[:, ::1] P1, double[::1] P2,
                i, double[::1] x, double[::1] g, full):
    return _oracle(problem_code, P1, P2, i, x, g, 1 if full else 0)


def dot_seq(double[::1] a, double[::1] b):
    return _dot(a, b)


def norm_seq(double[::1] a):
    return sqrt(_dot(a, a))


def run_dense(stepper_code, kind, problem_code,
              double[:, ::1] P1, double[::1] P2,
              double[::1] x, double[::1] m, double[::1] v,
              cnp.int64_t[::1] idx,
              double[::1] eta_arr, double[::1] theta_arr, double[::1] beta_arr,
              double sigma, double epsilon, double cl, double cu, literal,
              full_mode,
              double[::1] r_out, double[::1] gn_out, double[::1] mn_out,
              double[::1] xn_out, double[::1] obj_out,
              double[:, ::1] xh, double[:, ::1] mh, double[:, ::1] vh,
              double[:, ::1] gh, record):
    cdef int scode = <int> stepper_code
    cdef int kcode = <int> kind
    cdef int pcode = <int> problem_code
    cdef bint lit = <bint> bool(literal)
    cdef bint full = <bint> bool(full_mode)
    cdef bint rec = <bint> bool(record)
    cdef Py_ssize_t K = eta_arr.shape[0]
    cdef Py_ssize_t n = x.shape[0]
    cdef Py_ssize_t k, j
    cdef double f, xsq
    g_buf = np.empty(n, dtype=np.float64)
    cdef double[::1] g = g_buf
    with nogil:
        for k in range(K):
            f = _oracle(pcode, P1, P2, <Py_ssize_t> idx[k], x, g, full)
            r_out[k] = _residual(x, m, sigma)
            gn_out[k] = sqrt(_dot(g, g))
            mn_out[k] = sqrt(_dot(m, m))
            xsq = _dot(x, x)
            xn_out[k] = sqrt(xsq)
            obj_out[k] = f + 0.5 * sigma * xsq
            if rec:
                for j in range(n):
                    xh[k, j] = x[j]
                    mh[k, j] = m[j]
                    vh[k, j] = v[j]
                    gh[k, j] = g[j]
            if scode == 0:
                _step_afmdw(kcode, x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k],
                            sigma, epsilon, cl, cu, lit)
            elif scode == 1:
                _step_coupled(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k],
                              sigma, epsilon)
            else:
                _step_adamw(x, m, v, g, eta_arr[k], theta_arr[k], beta_arr[k],
                            sigma, epsilon)
        f = _oracle(pcode, P1, P2, 0, x, g, full)
        r_out[K] = _residual(x, m, sigma)
        gn_out[K] = NAN
        mn_out[K] = sqrt(_dot(m, m))
        xsq = _dot(x, x)
        xn_out[K] = sqrt(xsq)
        obj_out[K] = f + 0.5 * sigma * xsq
        if rec:
            for j in range(n):
                xh[K, j] = x[j]
                mh[K, j] = m[j]
                vh[K, j] = v[j]
