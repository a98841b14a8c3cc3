"""Build script for the optional Cython kernels.

The package works without the extension: ``weakkam._kernels`` falls back to
the numpy implementation when ``weakkam._ckernels`` cannot be imported.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("WEAKKAM_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
    except ImportError:
        print("Cython/numpy not available; building pure-Python weakkam")
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "weakkam._ckernels",
                    ["src/weakkam/_ckernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3", "-ffp-contract=off"],
                    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                )
            ],
            compiler_directives={
                "language_level": "3",
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
                "initializedcheck": False,
            },
        )

setup(ext_modules=ext_modules)
