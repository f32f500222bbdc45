"""Build script for the optional compiled core.

The package works without the extension; ``kpburgers._accel`` falls back to
numpy when ``kpburgers._trigsum`` cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("KPB_NO_EXTENSION") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "kpburgers._trigsum",
                    ["src/kpburgers/_trigsum.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
