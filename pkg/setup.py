import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [
            Extension(
                "hypfay._kernels._theta_cy",
                ["src/hypfay/_kernels/_theta_cy.pyx"],
                extra_compile_args=["-O3"],
                include_dirs=[numpy.get_include()],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-python fallback is selected at import time; the package works without
    # the compiled kernel, just slower
    ext_modules = []

setup(ext_modules=ext_modules)
