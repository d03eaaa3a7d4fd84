"""Build the optional compiled kernel extension.

The package works without the extension (a numpy fallback is selected at
import time); the extension only accelerates the stencil inner loops.
"""
import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

ext_modules = []
if cythonize is not None:
    ext = Extension(
        "entropy_lab._kernels._core",
        ["src/entropy_lab/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        # -ffp-contract=off keeps the compiled kernels bit-compatible with
        # the numpy fallback (no FMA fusion).
        extra_compile_args=["-O3", "-ffp-contract=off"],
        optional=True,
    )
    ext_modules = cythonize(
        [ext],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
