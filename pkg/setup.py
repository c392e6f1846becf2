"""Build script for the optional compiled kernel.

The package works without it: ``weiss._backend`` falls back to the pure-Python
evaluator when ``weiss._kernel`` cannot be imported.
"""

import os

from setuptools import setup

ext_modules = []
if not os.environ.get("WEISS_NO_EXT"):
    try:
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("weiss._kernel", ["src/weiss/_kernel.pyx"], extra_compile_args=["-O2"])],
            language_level=3,
        )

setup(ext_modules=ext_modules)
