"""Build the optional Cython hot-kernel extension.

The package works without it (a numpy fallback is selected at import time);
building it makes the FTZ tile kernels and ordered reductions much faster.
Set TILESIM_SKIP_EXT=1 to force a pure-Python install.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("TILESIM_SKIP_EXT"):
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "tilesim._ftzcore",
                    ["src/tilesim/_ftzcore.pyx"],
                    include_dirs=[numpy.get_include()],
                    # No -ffast-math, no FP contraction: the kernels depend on
                    # exact IEEE round-to-nearest-even at every intermediate
                    # step and explicit subnormal handling.
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
