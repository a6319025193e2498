"""Build script for the optional compiled evolution kernel.

The package is fully functional without the extension: ecosim._backend
falls back to the pure-Python kernel when the compiled module is absent
or when ECOSIM_BACKEND=pure is set.
"""

import sys

from setuptools import setup


def extensions():
    try:
        from Cython.Build import cythonize
    except ImportError:
        print("ecosim: Cython not available, building without compiled kernel",
              file=sys.stderr)
        return []
    try:
        return cythonize(
            "src/ecosim/_evolve_c.pyx",
            compiler_directives={
                "language_level": 3,
                "boundscheck": False,
                "wraparound": False,
                "cdivision": True,
            },
        )
    except Exception as exc:
        print(f"ecosim: skipping compiled kernel ({exc})", file=sys.stderr)
        return []


setup(ext_modules=extensions())
