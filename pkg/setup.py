"""Build script for the optional compiled kernel extension.

The package is fully functional without the extension (a numpy fallback is
selected at import time); set TABMARK_SKIP_EXTENSION=1 to build pure-Python.
"""

import os

from setuptools import setup
from setuptools.extension import Extension

extensions = []
if not os.environ.get("TABMARK_SKIP_EXTENSION"):
    import numpy as np
    from Cython.Build import cythonize

    extensions = cythonize(
        [
            Extension(
                "tabmark._kernels._fastpath",
                ["src/tabmark/_kernels/_fastpath.pyx"],
                include_dirs=[np.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
                # -ffp-contract=off: the compiled path must be bit-identical to
                # the numpy fallback, so FMA contraction is not allowed.
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )

setup(ext_modules=extensions)
