"""Build script for the compiled slot-loop kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs anyway and falls back to the pure-Python kernel at import
time (see actage.sim).
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    kernel = Extension(
        "actage._kernel",
        sources=["src/actage/_kernel.pyx"],
        extra_compile_args=["-O3"],
        optional=True,
    )
    extensions = cythonize([kernel], language_level="3")

setup(ext_modules=extensions)
