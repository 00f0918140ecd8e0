"""Build script: compiles the optional accelerator extension.

The package is fully functional without the extension (a pure Python
fallback is selected at import time), so any failure here degrades to a
source-only install instead of aborting.
"""

import logging

from setuptools import setup
from setuptools.command.build_ext import build_ext
from setuptools.errors import CCompilerError, ExecError, PlatformError

log = logging.getLogger("depseries.setup")


class BuildFailed(Exception):
    pass


class optional_build_ext(build_ext):
    def run(self):
        try:
            build_ext.run(self)
        except (PlatformError, FileNotFoundError) as exc:
            raise BuildFailed() from exc

    def build_extension(self, ext):
        try:
            build_ext.build_extension(self, ext)
        except (CCompilerError, ExecError, PlatformError, ValueError) as exc:
            raise BuildFailed() from exc


def _extensions():
    try:
        import numpy
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        log.warning("Cython or numpy unavailable, skipping compiled core")
        return []
    ext = Extension(
        "depseries._accel._core",
        sources=["src/depseries/_accel/_core.pyx"],
        include_dirs=[numpy.get_include()],
        define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    )
    return cythonize([ext], language_level=3)


def _setup(with_ext):
    kwargs = {}
    if with_ext:
        ext_modules = _extensions()
        if ext_modules:
            kwargs = {"ext_modules": ext_modules, "cmdclass": {"build_ext": optional_build_ext}}
    setup(**kwargs)


try:
    _setup(with_ext=True)
except BuildFailed:
    log.warning("compiled core failed to build, installing pure Python fallback")
    _setup(with_ext=False)
