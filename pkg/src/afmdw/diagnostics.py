"""Online verification quantities: the residual ||sigma x + m|| and its
bound series, the shadow-sequence identity, the Lyapunov function of the
single-timescale system, interpolated paths, stationarity gaps, and the
log-log slope estimator. Everything here is a pure function over arrays or
records.
"""

from __future__ import annotations

import csv
import math
from dataclasses import dataclass

import numpy as np

from . import _backend
from .errors import DegenerateFit, DimensionMismatch, QueryOutOfRange, UnsupportedProblem
from .minnorm import hull_distance

# ---------------------------------------------------------------------------
# trace


CSV_COLUMNS = (
    "mode", "k", "t", "objective", "residual", "bound",
    "xy_dist", "lyapunov", "stat_gap", "eta", "theta", "beta",
)


@dataclass
class Trace:
    """Per-iteration diagnostics, K+1 dense rows (k = 0..K).

    residual[k] = ||sigma x_k + m_k||; bound is its running upper bound
    (nan when no certificate applies); xy_dist = residual/sigma is the
    distance to the shadow sequence y_k = -m_k/sigma. The stepsize columns
    hold the values consumed by step k and are nan on the final row.
    """

    mode: str
    k: np.ndarray
    t: np.ndarray
    objective: np.ndarray
    residual: np.ndarray
    bound: np.ndarray
    xy_dist: np.ndarray
    lyapunov: np.ndarray
    stat_gap: np.ndarray
    eta: np.ndarray
    theta: np.ndarray
    beta: np.ndarray

    def __len__(self) -> int:
        return self.k.shape[0]

    def column(self, name: str) -> np.ndarray:
        if name not in CSV_COLUMNS or name == "mode":
            raise KeyError(name)
        return getattr(self, name)

    def bound_violations(self) -> int:
        """Rows where the residual exceeds a finite bound."""
        have = np.isfinite(self.bound)
        return int(np.sum(self.residual[have] > self.bound[have]))


def write_trace_csv(trace: Trace, path: str) -> None:
    """One header row, then K+1 data rows; floats at 17 significant digits."""
    with open(path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(CSV_COLUMNS)
        for i in range(len(trace)):
            row = [trace.mode, str(int(trace.k[i]))]
            for name in CSV_COLUMNS[2:]:
                row.append(f"{getattr(trace, name)[i]:.17g}")
            w.writerow(row)


# ---------------------------------------------------------------------------
# residual and its bound


def residual(state, sigma: float) -> float:
    """||sigma x + m||."""
    x = np.ascontiguousarray(state.x, dtype=np.float64)
    m = np.ascontiguousarray(state.m, dtype=np.float64)
    if x.shape != m.shape:
        raise DimensionMismatch(f"x and m disagree: {x.shape} vs {m.shape}")
    return float(_backend.residual_norm(x, m, sigma))


@dataclass(frozen=True)
class BoundConstants:
    """Realized run constants feeding the residual bound.

    m_x bounds ||x_k|| (and ||m_0||); m_d bounds ||g_k|| + ||m_k||;
    eta_tilde is the contraction margin of the x-update, i.e.
    max(|1 - eta_k sigma M_v|, |1 - eta_k sigma eps_v|) <= 1 - eta_tilde
    for every k.
    """

    sigma: float
    m_x: float
    m_d: float
    eta_tilde: float

    def __post_init__(self):
        for name in ("sigma", "m_x", "m_d", "eta_tilde"):
            if not math.isfinite(getattr(self, name)):
                raise DimensionMismatch(f"bound constant {name} must be finite")
        if not (0.0 < self.eta_tilde <= 1.0):
            raise DimensionMismatch(f"eta_tilde must be in (0, 1], got {self.eta_tilde}")


def bound_series(consts: BoundConstants, theta) -> np.ndarray:
    """delta_hat_k = (1-eta_tilde) delta_hat_{k-1} + 2 m_d theta_k, seeded
    with delta_hat_{-1} = sigma m_x + m_d. Stable recursion form of the
    geometric-sum closed form."""
    theta = np.asarray(theta, dtype=np.float64)
    out = np.empty(theta.shape[0])
    decay = 1.0 - consts.eta_tilde
    prev = consts.sigma * consts.m_x + consts.m_d
    force = 2.0 * consts.m_d
    for k in range(theta.shape[0]):
        prev = decay * prev + force * theta[k]
        out[k] = prev
    return out


# ---------------------------------------------------------------------------
# shadow sequence


def shadow_identity_ulps(m_hist, g_hist, theta, sigma: float) -> np.ndarray:
    """Per-step worst-coordinate ulp error of the shadow-SGD identity.

    With y_k = -m_k/sigma the decoupled momentum update implies
    y_{k+1} = y_k - (theta_k/sigma)(g_k + sigma y_k) exactly in real
    arithmetic; this measures how far the recorded states drift from the
    recomputed right-hand side, in units of spacing at the larger operand.
    """
    m_hist = np.asarray(m_hist, dtype=np.float64)
    g_hist = np.asarray(g_hist, dtype=np.float64)
    theta = np.asarray(theta, dtype=np.float64)
    if m_hist.shape[0] != g_hist.shape[0] + 1 or g_hist.shape[0] != theta.shape[0]:
        raise DimensionMismatch("need K+1 momentum rows, K gradient rows, K stepsizes")
    y = -m_hist[:-1] / sigma
    y_next = -m_hist[1:] / sigma
    step = (theta / sigma)[:, None] * (g_hist + sigma * y)
    pred = y - step
    diff = np.abs(pred - y_next)
    # measure at the scale of the operands that formed the result: when the
    # momentum crosses zero the magnitudes |pred| and |y_next| collapse while
    # the rounding noise stays proportional to |y| and to the update term, so
    # both belong in the unit
    scale = np.maximum(
        np.maximum(np.abs(y), np.abs(step)),
        np.maximum(np.abs(pred), np.abs(y_next)),
    )
    unit = np.spacing(scale)
    ulps = diff / unit
    return np.max(ulps, axis=1)


def shadow_step_check(record, sigma: float | None = None, max_ulps: float = 4.0) -> bool:
    """True iff the recorded step satisfies the shadow identity to
    max_ulps per coordinate. sigma defaults to the record's own value."""
    if sigma is None:
        sigma = record.sigma
    m_hist = np.stack([record.state_before.m, record.state_after.m])
    g_hist = record.sample.g[None, :]
    theta = np.array([record.theta_k])
    worst = shadow_identity_ulps(m_hist, g_hist, theta, sigma)
    return bool(worst[0] <= max_ulps)


# ---------------------------------------------------------------------------
# Lyapunov function of the single-timescale system


def lyapunov_h(problem, x, m, v, sigma: float, tau1: float, epsilon: float) -> float:
    """f(x) + (sigma/2)||x||^2 + (1/(2 tau1)) <m+sigma x, H (m+sigma x)>
    with H = (max(v,0)+epsilon)^(-1/2) elementwise."""
    x = np.ascontiguousarray(x, dtype=np.float64)
    m = np.ascontiguousarray(m, dtype=np.float64)
    v = np.ascontiguousarray(v, dtype=np.float64)
    f = problem.eval_full(x)
    xs = x.tolist()
    ms = m.tolist()
    vs = v.tolist()
    xsq = 0.0
    quad = 0.0
    for j in range(len(xs)):
        xsq += xs[j] * xs[j]
        w = ms[j] + sigma * xs[j]
        vp = vs[j] if vs[j] > 0.0 else 0.0
        quad += w * w / math.sqrt(vp + epsilon)
    return f + 0.5 * sigma * xsq + quad / (2.0 * tau1)


# ---------------------------------------------------------------------------
# interpolated process


class PathFn:
    """Piecewise-linear path through knot states on a given clock.

    Defined on [t_0, t_last); exact at knots, affine between them.
    """

    def __init__(self, times: np.ndarray, values: np.ndarray):
        times = np.asarray(times, dtype=np.float64)
        values = np.asarray(values, dtype=np.float64)
        if values.ndim == 1:
            values = values[:, None]
        if times.ndim != 1 or times.shape[0] != values.shape[0] or times.shape[0] < 2:
            raise DimensionMismatch("need matching times/values with at least 2 knots")
        if np.any(np.diff(times) <= 0.0):
            raise DimensionMismatch("knot times must be strictly increasing")
        self.times = times
        self.values = values

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def __call__(self, t: float) -> np.ndarray:
        if not (self.times[0] <= t < self.times[-1]):
            raise QueryOutOfRange(f"t = {t} outside [{self.times[0]}, {self.times[-1]})")
        i = int(np.searchsorted(self.times, t, side="right") - 1)
        t0, t1 = self.times[i], self.times[i + 1]
        s = (t - t0) / (t1 - t0)
        return (1.0 - s) * self.values[i] + s * self.values[i + 1]


def interpolate(trace_x, steps) -> PathFn:
    """w(lambda_i + s) = x_i + (s/eta_i)(x_{i+1} - x_i) with
    lambda_i = sum of the first i steps."""
    values = np.asarray(trace_x, dtype=np.float64)
    steps = np.asarray(steps, dtype=np.float64)
    L = values.shape[0]
    if steps.shape[0] == L:
        steps = steps[: L - 1]  # last stepsize unused
    if steps.shape[0] != L - 1:
        raise DimensionMismatch(f"need {L - 1} steps for {L} knots, got {steps.shape[0]}")
    if np.any(steps <= 0.0):
        raise DimensionMismatch("steps must be positive")
    times = np.concatenate(([0.0], np.cumsum(steps)))
    return PathFn(times, values)


# ---------------------------------------------------------------------------
# stationarity gap


def stationarity_gap(
    problem,
    x,
    delta: float,
    sigma: float,
    exact: bool = True,
    rng: np.random.Generator | None = None,
    samples: int = 64,
) -> float:
    """dist(0, conv D_g^delta(x)) for the delta-expanded regularized field.

    Exact (and for delta > 0 a certified lower bound, conservative by the
    delta slack) for the piecewise-linear and smooth built-ins; problems
    without declared structure get a Monte-Carlo upper envelope when
    exact=False and are refused otherwise.
    """
    if delta < 0.0:
        raise DimensionMismatch(f"delta must be >= 0, got {delta}")
    x = np.ascontiguousarray(x, dtype=np.float64)
    structure = getattr(problem, "structure", None)

    if structure == "separable-l1":
        kinks = problem.kinks  # (N, n) anchor rows
        ncomp = kinks.shape[0]
        total = 0.0
        for j in range(x.shape[0]):
            lo = hi = 0.0
            for i in range(ncomp):
                d = float(x[j]) - kinks[i, j]
                if abs(d) <= delta:
                    lo -= 1.0
                    hi += 1.0
                else:
                    s = 1.0 if d > 0.0 else -1.0
                    lo += s
                    hi += s
            lo = lo / ncomp + sigma * float(x[j]) - sigma * delta
            hi = hi / ncomp + sigma * float(x[j]) + sigma * delta
            if lo > 0.0:
                total += lo * lo
            elif hi < 0.0:
                total += hi * hi
        return max(0.0, math.sqrt(total) - delta)

    if structure == "max-affine":
        a, b = problem.a, problem.b
        vals = a @ x + b
        fmax = float(np.max(vals))
        lbar = problem.m_f
        # small absolute slack so pieces tied up to rounding stay active
        tol = max(
            2.0 * lbar * delta,
            64.0 * np.finfo(np.float64).eps * (1.0 + abs(fmax) + float(np.max(np.abs(b)))),
        )
        active = np.where(fmax - vals <= tol)[0]
        gap0 = hull_distance(a[active] + sigma * x)
        return max(0.0, gap0 - (1.0 + sigma) * delta)

    if structure == "smooth-quad":
        norm = math.sqrt(float(_backend.dot_seq(x, x)))
        return max(0.0, (1.0 + sigma) * norm - (2.0 + sigma) * delta)

    if exact:
        raise UnsupportedProblem(
            f"no exact stationarity oracle for problem {getattr(problem, 'problem_id', '?')!r}; "
            "pass exact=False for a Monte-Carlo estimate"
        )
    rng = rng or np.random.default_rng(0)
    best = math.inf
    for s in range(samples):
        if delta > 0.0 and s > 0:
            z = x + rng.uniform(-delta, delta, size=x.shape[0])
        else:
            z = x
        w = problem.full_subgradient(z) + sigma * z
        best = min(best, float(np.linalg.norm(w)))
    return max(0.0, best - delta)


# ---------------------------------------------------------------------------
# slope estimation


def loglog_slope(series, tail_fraction: float, k=None) -> float:
    """Least-squares slope of log(series) against log(k) over the final
    tail_fraction of the points. Nonpositive entries are dropped; fewer
    than 10 usable tail points is an error."""
    series = np.asarray(series, dtype=np.float64)
    if not (0.0 < tail_fraction < 1.0):
        raise DegenerateFit(f"tail_fraction must be in (0,1), got {tail_fraction}")
    if k is None:
        k = np.arange(series.shape[0], dtype=np.float64)
    else:
        k = np.asarray(k, dtype=np.float64)
    start = series.shape[0] - int(math.ceil(tail_fraction * series.shape[0]))
    kt = k[start:]
    st = series[start:]
    keep = (st > 0.0) & (kt > 0.0)
    kt, st = kt[keep], st[keep]
    if kt.shape[0] < 10:
        raise DegenerateFit(f"only {kt.shape[0]} usable tail points, need >= 10")
    lx = np.log(kt)
    ly = np.log(st)
    lx = lx - lx.mean()
    return float(np.dot(lx, ly - ly.mean()) / np.dot(lx, lx))
