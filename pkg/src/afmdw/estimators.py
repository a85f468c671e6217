"""Second-moment estimator catalog.

Each estimator kind is a pair (v-update rule, preconditioner map H) together
with a certified elementwise range [eps_v, M_v] for H(v) that holds whenever
the gradient stream satisfies ||g||_inf <= M_f + M_xi and v starts inside the
rule's invariant region. The functions here are the plain-numpy reference
implementations; the fused step kernels in ``_purepy``/``_kernels`` must agree
with them bit for bit (tested).

String ids: "sgdw", "adam", "amsgrad", "adamax", "radam", "adabelief",
"adabound", "yogi", "st".

Notes kept close to the code on purpose:

* "radam" uses the plain adam v-rule and preconditioner; the variance
  rectification warmup of the original method is out of scope here, so adam
  and radam differ only by name.
* "adabound" defaults to the standard clamp min(hi, max(lo, v^-1/2)).
  ``literal_clamp=True`` switches to min(lo, max(hi, v^-1/2)), which for
  lo < hi collapses to the constant lo; it exists so the printed form of the
  rule can be reproduced verbatim.
* "yogi" uses sign(0) = 0.
* bias correction is out of scope for every kind.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ConfigError

KINDS = (
    "sgdw",
    "adam",
    "amsgrad",
    "adamax",
    "radam",
    "adabelief",
    "adabound",
    "yogi",
    "st",
)

# integer codes shared with the compiled kernels
KIND_CODES = {name: i for i, name in enumerate(KINDS)}


@dataclass(frozen=True)
class EstimatorScheme:
    """Hyperparameters selecting one estimator kind.

    beta1 is the default v-stepsize; steppers that take a per-iteration beta
    schedule pass the scheduled value instead. epsilon is the damping constant
    of the preconditioner. clamp_lo/clamp_hi are only read by "adabound".
    """

    kind: str
    beta1: float = 1e-4
    epsilon: float = 1e-8
    clamp_lo: float = 0.1
    clamp_hi: float = 10.0
    literal_clamp: bool = False

    def __post_init__(self):
        if self.kind not in KINDS:
            raise ConfigError(f"unknown estimator kind {self.kind!r}")
        if not (0.0 < self.beta1 < 1.0):
            raise ConfigError(f"beta1 must lie in (0,1), got {self.beta1}")
        if not self.epsilon > 0.0:
            raise ConfigError(f"epsilon must be positive, got {self.epsilon}")
        if not (0.0 < self.clamp_lo < self.clamp_hi):
            raise ConfigError(
                f"need 0 < clamp_lo < clamp_hi, got ({self.clamp_lo}, {self.clamp_hi})"
            )

    @property
    def code(self) -> int:
        return KIND_CODES[self.kind]


def v0_default(scheme: EstimatorScheme, dim: int) -> np.ndarray:
    """Default initial estimator state: zeros, except adamax which needs v > 0."""
    if scheme.kind == "adamax":
        return np.full(dim, scheme.epsilon, dtype=np.float64)
    return np.zeros(dim, dtype=np.float64)


def update_estimator(
    scheme: EstimatorScheme,
    v: np.ndarray,
    g: np.ndarray,
    m_next: np.ndarray,
    k: int = 0,
    *,
    beta1: float | None = None,
) -> np.ndarray:
    """One v-update. m_next is the already-updated momentum (adabelief reads it).

    Returns a new array; inputs are not mutated. ``beta1`` overrides the
    scheme default (steppers pass the scheduled per-iteration value).
    """
    b = scheme.beta1 if beta1 is None else beta1
    kind = scheme.kind
    if kind in ("sgdw", "adam", "radam", "adabound"):
        return (1.0 - b) * v + b * (g * g)
    if kind == "amsgrad":
        return np.maximum(v, (1.0 - b) * v + b * (g * g))
    if kind == "adamax":
        return np.maximum(b * v, np.abs(g) + scheme.epsilon)
    if kind == "adabelief":
        d = g - m_next
        return (1.0 - b) * v + b * (d * d)
    if kind == "yogi":
        gg = g * g
        return v - b * (np.sign(v - gg) * gg)
    if kind == "st":
        # the single-timescale rule is driven by tau2*eta, handled by its stepper;
        # here b plays that role directly: v' = v - b*(v - g^2)
        return v - b * (v - g * g)
    raise ConfigError(f"unknown estimator kind {kind!r}")


def precondition(scheme: EstimatorScheme, v: np.ndarray) -> np.ndarray:
    """Elementwise preconditioner H(v) for the x-update."""
    kind = scheme.kind
    if kind == "sgdw":
        return np.ones_like(v)
    if kind in ("adam", "amsgrad", "radam", "adabelief", "yogi"):
        return 1.0 / (np.sqrt(v) + scheme.epsilon)
    if kind == "adamax":
        if np.any(v <= 0.0):
            raise ConfigError("adamax preconditioner needs v > 0 elementwise")
        return 1.0 / v
    if kind == "adabound":
        with np.errstate(divide="ignore"):
            r = 1.0 / np.sqrt(v)
        if scheme.literal_clamp:
            return np.minimum(scheme.clamp_lo, np.maximum(scheme.clamp_hi, r))
        return np.minimum(scheme.clamp_hi, np.maximum(scheme.clamp_lo, r))
    if kind == "st":
        return 1.0 / np.sqrt(np.maximum(v, 0.0) + scheme.epsilon)
    raise ConfigError(f"unknown estimator kind {kind!r}")


def bound_certificate(scheme: EstimatorScheme, m_f: float, m_xi: float) -> tuple[float, float]:
    """Certified elementwise range (eps_v, M_v) of H along admissible streams.

    m_f bounds the exact-oracle subgradients, m_xi the noise, so the stream
    satisfies ||g||_inf <= m_f + m_xi. If the problem has no finite bound the
    returned eps_v degenerates to 0.0 and validation reports it as unknown.

    The adamax lower certificate 1/(M^2+eps) is only a true lower bound when
    M = m_f + m_xi >= 1 (for M < 1 the invariant region [eps, M+eps] gives the
    tighter 1/(M+eps) and the stated value overshoots it). Callers that need a
    sound certificate for M < 1 should use adam instead; the acceptance config
    keeps M >= 1.
    """
    m = m_f + m_xi
    eps = scheme.epsilon
    kind = scheme.kind
    if kind == "sgdw":
        return (1.0, 1.0)
    if kind in ("adam", "amsgrad", "radam", "yogi"):
        return (1.0 / (m + eps), 1.0 / eps)
    if kind == "adamax":
        return (1.0 / (m * m + eps), 1.0 / eps)
    if kind == "adabelief":
        return (1.0 / (2.0 * m + eps), 1.0 / eps)
    if kind == "adabound":
        return (scheme.clamp_lo, scheme.clamp_hi)
    if kind == "st":
        return (1.0 / np.sqrt(m * m + eps), 1.0 / np.sqrt(eps))
    raise ConfigError(f"unknown estimator kind {kind!r}")
