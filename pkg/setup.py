# Builds the optional compiled kernel extension. The package works without it
# (quantdag.kernels falls back to the numpy implementation), so any failure
# here is demoted to a warning rather than aborting the install.
import warnings

from setuptools import setup

ext_modules = []
try:
    import numpy as np
    from Cython.Build import cythonize
    from setuptools.extension import Extension

    ext_modules = cythonize(
        [
            Extension(
                "quantdag.kernels._core",
                ["src/quantdag/kernels/_core.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level="3",
    )
except Exception as exc:  # pragma: no cover - depends on build host
    warnings.warn(f"compiled kernels skipped ({exc}); using the python fallback")

setup(ext_modules=ext_modules)
