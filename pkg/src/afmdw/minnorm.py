"""Minimum-norm point over the convex hull of a small point set.

Exhaustive subset enumeration: the minimizer over the hull lies in the
relative interior of some face, so solving the equality-constrained problem
on every subset and keeping the feasible (all barycentric weights >= 0)
candidates finds it exactly. Fine for <= 8 points; larger sets are refused
rather than approximated.
"""

from __future__ import annotations

import numpy as np

from .errors import DimensionMismatch, UnsupportedProblem

MAX_POINTS = 8
_FEAS_TOL = 1e-9


def min_norm_point(points) -> np.ndarray:
    """argmin_{w in conv(points)} ||w|| for points given as rows."""
    p = np.asarray(points, dtype=np.float64)
    if p.ndim != 2 or p.shape[0] == 0:
        raise DimensionMismatch(f"need a nonempty 2-d point array, got shape {p.shape}")
    mcount = p.shape[0]
    if mcount > MAX_POINTS:
        raise UnsupportedProblem(f"minimum-norm enumeration capped at {MAX_POINTS} points, got {mcount}")

    best = None
    best_norm = np.inf
    gram = p @ p.T
    for mask in range(1, 1 << mcount):
        sel = [i for i in range(mcount) if mask & (1 << i)]
        s = len(sel)
        if s == 1:
            cand = p[sel[0]]
        else:
            # KKT system for min ||sum lam_i p_i||^2 subject to sum lam = 1
            kkt = np.empty((s + 1, s + 1))
            kkt[:s, :s] = gram[np.ix_(sel, sel)]
            kkt[:s, s] = 1.0
            kkt[s, :s] = 1.0
            kkt[s, s] = 0.0
            rhs = np.zeros(s + 1)
            rhs[s] = 1.0
            lam = np.linalg.lstsq(kkt, rhs, rcond=None)[0][:s]
            if np.min(lam) < -_FEAS_TOL:
                continue
            cand = lam @ p[sel]
        norm = float(np.linalg.norm(cand))
        if norm < best_norm:
            best_norm = norm
            best = cand
    return np.array(best, dtype=np.float64)


def hull_distance(points) -> float:
    """dist(0, conv(points))."""
    return float(np.linalg.norm(min_norm_point(points)))
