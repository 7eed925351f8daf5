"""Build the optional compiled kernels.

Cython regenerates ``_kernels.c`` when it is installed; otherwise the
shipped C file is compiled.  If compilation fails the package installs
without the extension and runs on the NumPy fallback.
"""
import os
import sys

import numpy as np
from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext

HERE = os.path.dirname(os.path.abspath(__file__))
PYX = os.path.join("src", "gridnet", "_kernels.pyx")
C_SRC = os.path.join("src", "gridnet", "_kernels.c")

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as err:  # no compiler or headers
            print(f"warning: compiled kernels not built ({err}); using the NumPy fallback", file=sys.stderr)

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as err:
            print(f"warning: {ext.name} not built ({err}); using the NumPy fallback", file=sys.stderr)


def extensions():
    use_cython = cythonize is not None and os.path.exists(os.path.join(HERE, PYX))
    source = PYX if use_cython else C_SRC
    ext = Extension(
        "gridnet._kernels",
        [source],
        include_dirs=[np.get_include()],
        extra_compile_args=["-O3"],
    )
    if use_cython:
        return cythonize([ext], compiler_directives={"language_level": "3"})
    return [ext]


setup(ext_modules=extensions(), cmdclass={"build_ext": OptionalBuildExt})
