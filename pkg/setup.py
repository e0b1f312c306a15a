import numpy
from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "gkhydro._kmc_cy",
                ["src/gkhydro/_kmc_cy.pyx"],
                include_dirs=[numpy.get_include()],
                define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
            )
        ],
        language_level=3,
    )
except ImportError:
    # pure-Python fallback kernel is selected at import time
    ext_modules = []

setup(ext_modules=ext_modules)
