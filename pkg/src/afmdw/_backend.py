"""Backend selection: compiled kernels if the extension built, numpy otherwise.

Set AFMDW_PURE_PYTHON=1 to force the fallback (used by the benchmark and the
cross-backend equivalence tests). Both backends expose the same functions and
produce bit-identical results.
"""

import os

if os.environ.get("AFMDW_PURE_PYTHON"):
    from . import _purepy as impl
else:
    try:
        from . import _kernels as impl  # type: ignore[no-redef]
    except ImportError:
        from . import _purepy as impl  # type: ignore[no-redef]

COMPILED = bool(impl.COMPILED)
BACKEND_NAME = "compiled" if COMPILED else "pure-python"

PROB_ABS1D = impl.PROB_ABS1D
PROB_L1QUAD = impl.PROB_L1QUAD
PROB_MAXPIECE = impl.PROB_MAXPIECE
PROB_QUAD = impl.PROB_QUAD
STEP_DECOUPLED = impl.STEP_DECOUPLED
STEP_COUPLED = impl.STEP_COUPLED
STEP_ADAMW = impl.STEP_ADAMW

step_afmdw = impl.step_afmdw
step_coupled = impl.step_coupled
step_adamw = impl.step_adamw
run_dense = impl.run_dense
oracle_eval = impl.oracle_eval
residual_norm = impl.residual_norm
dot_seq = impl.dot_seq
norm_seq = impl.norm_seq
