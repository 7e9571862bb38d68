import os

from setuptools import Extension, setup

# The compiled kernels are an optional speedup: if Cython is unavailable the
# package falls back to the numpy implementation selected at import time.
ext_modules = []
if os.environ.get("QCLT_NO_EXTENSION") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "qclt._kernels",
                    ["src/qclt/_kernels.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
