"""Build the optional Cython kernel core.

The package works without the extension; when Cython or a C compiler is
missing the build falls back to pure Python and ``rare_sais.kernels``
selects the numpy implementation at import time.
"""
import os

import numpy as np
from setuptools import setup
from setuptools.command.build_ext import build_ext


class OptionalBuildExt(build_ext):
    def run(self):
        try:
            super().run()
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: Cython core not built ({exc}); using numpy kernels")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:  # noqa: BLE001
            print(f"WARNING: failed to build {ext.name} ({exc}); using numpy kernels")


def extensions():
    if os.environ.get("RARE_SAIS_NO_EXT"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    from setuptools import Extension

    core = Extension("rare_sais._ckernels", ["src/rare_sais/_ckernels.pyx"])
    return cythonize(
        [core],
        language_level=3,
        compiler_directives={"boundscheck": False, "wraparound": False, "cdivision": True},
    )


setup(
    ext_modules=extensions(),
    include_dirs=[np.get_include()],
    cmdclass={"build_ext": OptionalBuildExt},
)
