import numpy as np
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "bcwave._march",
                ["src/bcwave/_march.pyx"],
                include_dirs=[np.get_include()],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # The package works without the compiled march; the numpy fallback is
    # selected at import time.
    ext_modules = []

setup(ext_modules=ext_modules)
