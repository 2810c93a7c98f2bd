"""Build script for the compiled kernel core.

The extension is optional: set BUTTERFLYNET_NO_EXT=1 to skip compilation
and run on the pure-numpy kernel backend.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("BUTTERFLYNET_NO_EXT"):
    import numpy as np
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "butterflynet.kernels._ext",
                sources=["src/butterflynet/kernels/_ext.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
            "language_level": "3",
        },
    )

setup(ext_modules=ext_modules)
