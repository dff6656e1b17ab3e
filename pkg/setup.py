"""Build script: compiles the optional Cython kernel extension.

Set REFBIAS_SKIP_EXT=1 to install without the compiled core; the package
then runs on the numpy fallback backend with identical results.
"""

import os

from setuptools import Extension, setup

extensions = []
if not os.environ.get("REFBIAS_SKIP_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        extensions = cythonize(
            [
                Extension(
                    "refbias.kernels._ckernels",
                    ["src/refbias/kernels/_ckernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=extensions)
