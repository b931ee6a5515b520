"""Build script: compiles the optional fast kernels.

The package works without the extension (a pure numpy/Python backend is
selected at import time); the extension only accelerates the Monte Carlo
sampler and the spectral product kernel.
"""

import os

from setuptools import setup

ext_modules = []
try:
    if not os.path.exists("src/inarlim/_kernels.pyx"):
        raise ImportError
    import numpy as np
    from Cython.Build import cythonize
    from setuptools import Extension

    ext_modules = cythonize(
        [
            Extension(
                "inarlim._kernels",
                ["src/inarlim/_kernels.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3", "-fopenmp", "-ffp-contract=off"],
                extra_link_args=["-fopenmp"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
