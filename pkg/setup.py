import os

import numpy as np
from setuptools import Extension, setup

ext_modules = []
if os.environ.get("HIERLAB_NO_EXT", "") in ("", "0"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [Extension("hierlab._kernels._fast", ["src/hierlab/_kernels/_fast.pyx"],
                       include_dirs=[np.get_include()],
                       define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")])],
            language_level="3",
        )

setup(ext_modules=ext_modules)
