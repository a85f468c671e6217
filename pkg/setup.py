"""Build script: compiles the optional fast stepping kernels.

The package works without the extension (a numpy fallback is selected at
import time), so environments without a C toolchain can still install by
setting AFMDW_SKIP_EXT=1.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("AFMDW_SKIP_EXT"):
    import numpy
    from Cython.Build import cythonize

    ext = Extension(
        "afmdw._kernels",
        sources=["src/afmdw/_kernels.pyx"],
        include_dirs=[numpy.get_include()],
        # -ffp-contract=off keeps the C arithmetic bit-identical to the
        # numpy fallback (no fused multiply-adds sneaking in).
        extra_compile_args=["-O2", "-ffp-contract=off"],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    ext_modules = cythonize([ext], language_level=3)

setup(ext_modules=ext_modules)
