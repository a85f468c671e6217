"""Differential-inclusion trajectory simulation and stationary-set oracles.

The set-valued right-hand sides are resolved with the same canonical
selections as the subgradient oracles (sign(0) = 0, first argmax), so the
integrator produces one admissible trajectory of the inclusion, not the
whole solution set. Explicit Euler only.
"""

from __future__ import annotations

import csv
import itertools
import math
from dataclasses import dataclass, field

import numpy as np

from . import diagnostics
from .diagnostics import PathFn
from .errors import DimensionMismatch, QueryOutOfRange, UnsupportedProblem
from .minnorm import hull_distance

_EQ_TOL = 1e-10
_DEDUP_TOL = 1e-9


@dataclass
class DIPath:
    """Euler trajectory: uniform knot times, knot states, and companion
    per-knot series (regularized objective; residual and Lyapunov value for
    the coupled system, nan otherwise)."""

    mode: str
    dt: float
    times: np.ndarray
    values: np.ndarray  # (L, n) primary states (y, or x for the coupled system)
    m: np.ndarray | None = None
    v: np.ndarray | None = None
    objective: np.ndarray | None = None
    residual: np.ndarray | None = None
    lyapunov: np.ndarray | None = None
    _fn: PathFn | None = field(default=None, repr=False)

    @property
    def t_end(self) -> float:
        return float(self.times[-1])

    def at(self, t: float) -> np.ndarray:
        if self._fn is None:
            self._fn = PathFn(self.times, self.values)
        return self._fn(t)


def integrate_di_sgd(problem, y0, sigma: float, dt: float, T: float) -> DIPath:
    """Explicit Euler for dy/dt = -(selection of D_f(y) + sigma y)."""
    if not (dt > 0.0 and T >= dt):
        raise DimensionMismatch(f"need dt > 0 and T >= dt, got dt={dt}, T={T}")
    y = np.ascontiguousarray(np.asarray(y0, dtype=np.float64).reshape(-1))
    if y.shape[0] != problem.dim:
        raise DimensionMismatch(f"y0 has dim {y.shape[0]}, problem needs {problem.dim}")
    steps = int(math.ceil(T / dt))
    ys = np.empty((steps + 1, y.shape[0]))
    obj = np.empty(steps + 1)
    ys[0] = y
    obj[0] = problem.eval_full(y) + 0.5 * sigma * float(y @ y)
    for k in range(steps):
        d = problem.full_subgradient(y)
        y = y - dt * (d + sigma * y)
        ys[k + 1] = y
        obj[k + 1] = problem.eval_full(y) + 0.5 * sigma * float(y @ y)
    times = dt * np.arange(steps + 1, dtype=np.float64)
    return DIPath(mode="di-sgd", dt=dt, times=times, values=ys, objective=obj)


def integrate_di_st(
    problem, x0, m0, v0, sigma: float, tau1: float, tau2: float,
    epsilon: float, dt: float, T: float,
) -> DIPath:
    """Explicit Euler on the coupled (x, m, v) dynamics with the selection
    d = full_subgradient(x) and the squared-selection v-target d^2."""
    if not (dt > 0.0 and T >= dt):
        raise DimensionMismatch(f"need dt > 0 and T >= dt, got dt={dt}, T={T}")
    x = np.ascontiguousarray(np.asarray(x0, dtype=np.float64).reshape(-1))
    m = np.ascontiguousarray(np.asarray(m0, dtype=np.float64).reshape(-1))
    v = np.ascontiguousarray(np.asarray(v0, dtype=np.float64).reshape(-1))
    n = problem.dim
    if not (x.shape[0] == m.shape[0] == v.shape[0] == n):
        raise DimensionMismatch("x0, m0, v0 must all have the problem dimension")
    steps = int(math.ceil(T / dt))
    xs = np.empty((steps + 1, n))
    ms = np.empty((steps + 1, n))
    vs = np.empty((steps + 1, n))
    obj = np.empty(steps + 1)
    res = np.empty(steps + 1)
    lyap = np.empty(steps + 1)

    def _record(k):
        xs[k] = x
        ms[k] = m
        vs[k] = v
        obj[k] = problem.eval_full(x) + 0.5 * sigma * float(x @ x)
        res[k] = float(np.linalg.norm(m + sigma * x))
        lyap[k] = diagnostics.lyapunov_h(problem, x, m, v, sigma, tau1, epsilon)

    _record(0)
    for k in range(steps):
        d = problem.full_subgradient(x)
        h = 1.0 / np.sqrt(np.maximum(v, 0.0) + epsilon)
        x_new = x - dt * h * (m + sigma * x)
        m_new = m - dt * tau1 * (m - d)
        v_new = v - dt * tau2 * (v - d * d)
        x, m, v = x_new, m_new, v_new
        _record(k + 1)
    times = dt * np.arange(steps + 1, dtype=np.float64)
    return DIPath(
        mode="di-st", dt=dt, times=times, values=xs, m=ms, v=vs,
        objective=obj, residual=res, lyapunov=lyap,
    )


def path_distance(w, p: DIPath, T: float, grid: int = 1000) -> float:
    """sup over a uniform grid on [0, T) of ||w(t) - p(t)||."""
    w_end = w.t_end if hasattr(w, "t_end") else None
    if w_end is not None and (T > w_end or T > p.t_end):
        raise QueryOutOfRange(
            f"paths cover [0, {min(w_end, p.t_end)}), cannot compare out to T = {T}"
        )
    ts = np.linspace(0.0, T, grid, endpoint=False)
    worst = 0.0
    for t in ts:
        wt = w(t) if callable(w) else w.at(t)
        worst = max(worst, float(np.linalg.norm(wt - p.at(t))))
    return worst


# ---------------------------------------------------------------------------
# stationary sets of the piecewise-linear built-ins


def _separable_coordinate_solutions(anchors: np.ndarray, sigma: float, lo: float, hi: float, resolution: float):
    """All x_j in [lo, hi] with 0 in (1/N) sum_i sign*(x_j - a_i) + sigma x_j,
    where sign* is the interval [-1,1] at kinks."""
    a = np.sort(anchors)
    ncomp = a.shape[0]
    sols: list[float] = []
    # open intervals between (and beyond) the anchors: constant slope s
    edges = [-math.inf] + [float(t) for t in a] + [math.inf]
    for i in range(len(edges) - 1):
        left, right = edges[i], edges[i + 1]
        if left == right:
            continue
        s = (2 * i - ncomp) / ncomp  # i anchors below, ncomp - i above
        if sigma > 0.0:
            cand = -s / sigma
            if left < cand < right and lo <= cand <= hi:
                sols.append(cand)
        elif s == 0.0:
            seg_lo = max(left, lo)
            seg_hi = min(right, hi)
            if seg_lo < seg_hi:
                count = max(2, int(math.floor((seg_hi - seg_lo) / resolution)) + 1)
                sols.extend(float(t) for t in np.linspace(seg_lo, seg_hi, count))
    # the kinks themselves
    for t in np.unique(a):
        below = float(np.sum(a < t))
        above = float(np.sum(a > t))
        at = float(np.sum(a == t))
        gl = (below - above - at) / ncomp + sigma * t
        gh = (below - above + at) / ncomp + sigma * t
        if gl <= 0.0 <= gh and lo <= t <= hi:
            sols.append(float(t))
    out = sorted(set(sols))
    dedup = []
    for t in out:
        if not dedup or t - dedup[-1] > _DEDUP_TOL:
            dedup.append(t)
    return dedup


def _maxpiece_stationary(a: np.ndarray, b: np.ndarray, sigma: float, lo: float, hi: float, resolution: float):
    npieces = a.shape[0]
    if npieces > 3:
        raise UnsupportedProblem(f"face enumeration caps at 3 pieces, got {npieces}")
    scale = 1.0 + float(np.max(np.abs(a))) + float(np.max(np.abs(b)))
    tol = 1e-9 * scale
    pts: list[np.ndarray] = []

    def is_max(x, subset) -> bool:
        vals = a @ x + b
        vmax = float(np.max(vals))
        return all(vals[r] >= vmax - tol for r in subset)

    def in_box(x) -> bool:
        return bool(np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12))

    # single active piece
    for r in range(npieces):
        if sigma > 0.0:
            x = -a[r] / sigma
            if is_max(x, [r]) and in_box(x):
                pts.append(x)
        elif float(np.linalg.norm(a[r])) <= _EQ_TOL:
            # zero-gradient piece: its whole dominance region is stationary
            count = max(2, int(math.floor((hi - lo) / resolution)) + 1)
            grid = np.linspace(lo, hi, count)
            for x0 in grid:
                for x1 in grid:
                    x = np.array([x0, x1])
                    if is_max(x, [r]):
                        pts.append(x)

    # two active pieces
    for r, s in itertools.combinations(range(npieces), 2):
        u = a[r] - a[s]
        uu = float(u @ u)
        if uu <= _EQ_TOL:
            continue
        if sigma > 0.0:
            lam = (-sigma * (b[s] - b[r]) - float(u @ a[s])) / uu
            if -1e-12 <= lam <= 1.0 + 1e-12:
                lam = min(max(lam, 0.0), 1.0)
                x = -(lam * a[r] + (1.0 - lam) * a[s]) / sigma
                if is_max(x, [r, s]) and in_box(x):
                    pts.append(x)
        else:
            if hull_distance(a[[r, s]]) <= _EQ_TOL:
                # stationary along the equal-value line u . x = b_s - b_r
                c = (b[s] - b[r]) / uu
                base = c * u
                tang = np.array([-u[1], u[0]]) / math.sqrt(uu)
                half = math.sqrt(2.0) * max(abs(lo), abs(hi))
                count = max(2, int(math.floor(2.0 * half / resolution)) + 1)
                for t in np.linspace(-half, half, count):
                    x = base + t * tang
                    if in_box(x) and is_max(x, [r, s]):
                        pts.append(x)

    # all three pieces tied
    if npieces == 3:
        rows = np.stack([a[0] - a[1], a[0] - a[2]])
        rhs = np.array([b[1] - b[0], b[2] - b[0]])
        if abs(float(np.linalg.det(rows))) > _EQ_TOL:
            x = np.linalg.solve(rows, rhs)
            if in_box(x) and is_max(x, [0, 1, 2]):
                if hull_distance(a + sigma * x) <= 1e-9:
                    pts.append(x)
    return pts


def brute_force_stationary(problem, sigma: float, box=(-2.0, 2.0), resolution: float = 1e-3) -> np.ndarray:
    """All points of {x : 0 in D_f(x) + sigma x} inside the box, with
    stationary segments (possible only at sigma = 0) discretized at
    resolution. Piecewise-linear problems in dimension <= 3 only."""
    if sigma < 0.0:
        raise DimensionMismatch(f"sigma must be >= 0, got {sigma}")
    lo, hi = float(box[0]), float(box[1])
    if not lo < hi:
        raise DimensionMismatch(f"empty box {box}")

    if problem.structure == "separable-l1":
        per_coord = [
            _separable_coordinate_solutions(problem.kinks[:, j], sigma, lo, hi, resolution)
            for j in range(problem.dim)
        ]
        if any(len(c) == 0 for c in per_coord):
            return np.empty((0, problem.dim))
        pts = [np.array(combo) for combo in itertools.product(*per_coord)]
        return np.array(pts)

    if problem.structure == "max-affine":
        pts = _maxpiece_stationary(problem.a, problem.b, sigma, lo, hi, resolution)
        if not pts:
            return np.empty((0, 2))
        arr = np.array(pts)
        order = np.lexsort(arr.T[::-1])
        arr = arr[order]
        keep = [0]
        for i in range(1, arr.shape[0]):
            if float(np.linalg.norm(arr[i] - arr[keep[-1]])) > _DEDUP_TOL:
                keep.append(i)
        return arr[keep]

    raise UnsupportedProblem(
        f"brute-force stationary enumeration needs a piecewise-linear built-in, "
        f"got {getattr(problem, 'problem_id', '?')!r}"
    )


def write_dipath_csv(path: DIPath, out_path: str) -> None:
    """Serialize on the Trace CSV schema; inapplicable columns are nan."""
    L = path.times.shape[0]
    nanarr = np.full(L, math.nan)
    obj = path.objective if path.objective is not None else nanarr
    res = path.residual if path.residual is not None else nanarr
    lyap = path.lyapunov if path.lyapunov is not None else nanarr
    with open(out_path, "w", encoding="utf-8", newline="") as fh:
        w = csv.writer(fh)
        w.writerow(diagnostics.CSV_COLUMNS)
        for i in range(L):
            w.writerow(
                [
                    path.mode,
                    str(i),
                    f"{path.times[i]:.17g}",
                    f"{obj[i]:.17g}",
                    f"{res[i]:.17g}",
                    f"{math.nan:.17g}",
                    f"{math.nan:.17g}",
                    f"{lyap[i]:.17g}",
                    f"{math.nan:.17g}",
                    f"{path.dt:.17g}",
                    f"{math.nan:.17g}",
                    f"{math.nan:.17g}",
                ]
            )
