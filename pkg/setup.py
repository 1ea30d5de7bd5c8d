"""Build hook for the optional compiled kernels.

The package works without the extension (a numpy fallback is selected at
import time), so a missing Cython toolchain degrades the build instead of
breaking it.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    extensions = []
else:
    extensions = cythonize(
        [
            Extension(
                "hashtrick._kernels._core",
                ["src/hashtrick/_kernels/_core.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        compiler_directives={
            "language_level": "3",
            "boundscheck": False,
            "wraparound": False,
            "cdivision": True,
        },
    )

setup(ext_modules=extensions)
