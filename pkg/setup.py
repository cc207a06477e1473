"""Build hook for the optional compiled kernel.

The package is fully functional without the extension (a numpy fallback is
selected at import time); set CARNOTMV_NO_EXT=1 to skip compilation.
"""

import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("CARNOTMV_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize

        ext_modules = cythonize(
            [Extension("carnotmv._kernels", ["src/carnotmv/_kernels.pyx"])],
            language_level=3,
        )
    except ImportError:
        ext_modules = []

setup(ext_modules=ext_modules)
