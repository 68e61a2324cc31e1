"""Build script for the optional compiled kernels.

The package is fully functional without the extension; anything that stops
the build (no Cython, no compiler, ACCKIT_NO_EXT=1) just means the pure
Python kernels are used at runtime.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("ACCKIT_NO_EXT"):
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            ["src/acckit/_kernels/_speedups.pyx"],
            compiler_directives={"language_level": "3"},
        )
    except ImportError:
        pass

setup(ext_modules=ext_modules)
