"""Build the optional compiled choice kernel.

If Cython or a C compiler is missing the package still installs; the pure
Python kernel is used instead.
"""
import os

from setuptools import Extension, setup

ext_modules = []
if not os.environ.get("GAPMATCH_NO_EXT"):
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        ext_modules = cythonize(
            [
                Extension(
                    "gapmatch._ckernel",
                    ["src/gapmatch/_ckernel.pyx"],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
