"""Build script: compiles the optional Cython kernel extension.

If Cython or a C compiler is unavailable the build falls back to the
pure-NumPy kernels in qhhg._kernels.pykernels; the package stays fully
functional, only slower.
"""
import sys

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext = Extension(
        "qhhg._kernels._core",
        sources=["src/qhhg/_kernels/_core.pyx"],
        include_dirs=[np.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
        extra_compile_args=["-O3"],
    )
    ext_modules = cythonize([ext], language_level=3)
except Exception as exc:  # pragma: no cover - build-env dependent
    sys.stderr.write(f"qhhg: building without compiled kernels ({exc})\n")

setup(ext_modules=ext_modules)
