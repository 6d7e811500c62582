"""Build script for the optional compiled walk kernels.

The package is fully functional without the extension (a NumPy fallback is
selected at import time); the Cython module exists because the per-step walk
loops dominate total runtime in the large simulation ladders.
"""

import os

from setuptools import Extension, setup

PYX = "src/spiralwalk/_walk_kernels.pyx"

try:
    if not os.path.exists(PYX):
        raise ImportError("no kernel sources present")
    from Cython.Build import cythonize
    import numpy as np

    ext_modules = cythonize(
        [
            Extension(
                "spiralwalk._walk_kernels",
                [PYX],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        compiler_directives={"language_level": 3},
    )
except ImportError:
    # Source-only install: the pure-NumPy kernels take over at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
