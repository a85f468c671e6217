"""Compare the compiled kernel backend against the pure-python fallback.

Both backends expose the same run_dense entry point and must produce
bit-identical iterates; this script times that loop on the analytic
problems and checks the equality while it is at it.

Usage:
    python3 benchmarks/bench_backends.py [--steps N] [--repeats R]
"""

import argparse
import math
import sys
import time

import numpy as np

from afmdw import _purepy
from afmdw.core import PowerSchedule, ConstantSchedule
from afmdw.estimators import EstimatorScheme, v0_default
from afmdw.problems import make_problem

try:
    from afmdw import _kernels
except ImportError:
    _kernels = None


CASES = (
    ("l1quad n=2, adam", "l1quad", {"c": "-1,0; 1,1"}, "adam"),
    ("l1quad n=3, amsgrad", "l1quad", {"c": "-1,0,1; 1,-1,0"}, "amsgrad"),
    ("quad n=16, adabelief", "quad", {"dim": 16}, "adabelief"),
    ("maxpiece2d, sgdw", "maxpiece2d", {"a": "1,0; -1,0; 0,1", "b": "0,0,0"}, "sgdw"),
)


def drive(impl, problem, kind, steps, seed=3):
    """Run the dense loop once on the given backend; returns (seconds, x)."""
    scheme = EstimatorScheme(kind, epsilon=1e-2)
    n = problem.dim
    rng = np.random.default_rng(seed)
    x = rng.uniform(-1.0, 1.0, size=n)
    m = np.zeros(n)
    v = v0_default(scheme, n)
    idx = rng.integers(0, problem.n_components, size=steps).astype(np.int64)
    eta = ConstantSchedule(0.05).array(steps)
    theta = PowerSchedule(0.1, 0.7).array(steps)
    beta = ConstantSchedule(1e-4).array(steps)
    r = np.empty(steps + 1)
    gn = np.empty(steps + 1)
    mn = np.empty(steps + 1)
    xn = np.empty(steps + 1)
    obj = np.empty(steps + 1)
    one = np.empty((1, n))
    gone = np.empty((1, n))
    t0 = time.perf_counter()
    impl.run_dense(
        impl.STEP_DECOUPLED, scheme.code, problem.kernel_code,
        problem.kernel_p1, problem.kernel_p2,
        x, m, v, idx, eta, theta, beta,
        0.1, scheme.epsilon, scheme.clamp_lo, scheme.clamp_hi,
        scheme.literal_clamp, False,
        r, gn, mn, xn, obj,
        one, one, one, gone, False,
    )
    return time.perf_counter() - t0, x


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--steps", type=int, default=200_000)
    ap.add_argument("--repeats", type=int, default=3)
    args = ap.parse_args(argv)

    if _kernels is None:
        print("compiled backend not built; nothing to compare against")
        return 1

    width = max(len(c[0]) for c in CASES)
    print(f"{args.steps} steps per case, best of {args.repeats} repeats\n")
    print(f"{'case':<{width}}  {'compiled':>10}  {'pure':>10}  {'speedup':>8}  equal")
    print("-" * (width + 46))
    for label, pid, params, kind in CASES:
        problem = make_problem(pid, params)
        tc = math.inf
        tp = math.inf
        xc = xp = None
        for _ in range(args.repeats):
            t, xc = drive(_kernels, problem, kind, args.steps)
            tc = min(tc, t)
            t, xp = drive(_purepy, problem, kind, args.steps)
            tp = min(tp, t)
        same = np.array_equal(xc, xp)
        print(
            f"{label:<{width}}  {tc * 1e3:>8.1f}ms  {tp * 1e3:>8.1f}ms"
            f"  {tp / tc:>7.1f}x  {same}"
        )
        if not same:
            print("  MISMATCH: backends disagree bitwise", file=sys.stderr)
            return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
