"""Build script: compiles the optional descent kernel.

The package works without the extension (a pure-Python kernel is selected at
import time), so any failure here downgrades to a source-only install instead
of aborting. Build with SUBTILING_REQUIRE_EXT=1 to turn kernel build problems
into hard errors.

FP contraction is disabled so the compiled kernel stays bit-identical to the
pure-Python reference on targets whose compilers would otherwise emit fused
multiply-adds.
"""

import os
import sys

from setuptools import setup

ext_modules = []
try:
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "subtiling._descent_cy",
                ["src/subtiling/_descent_cy.pyx"],
                extra_compile_args=["-ffp-contract=off"],
            )
        ],
        compiler_directives={"language_level": 3, "boundscheck": False, "wraparound": False},
    )
except Exception as exc:  # Cython missing or no compiler
    if os.environ.get("SUBTILING_REQUIRE_EXT"):
        raise
    sys.stderr.write(f"subtiling: skipping compiled kernel ({exc}); pure-Python fallback will be used\n")

setup(ext_modules=ext_modules)
