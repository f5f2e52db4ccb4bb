"""Build script for the optional compiled kernel.

The extension is optional: if Cython or a C compiler is unavailable the
package installs without it and ``bllab.kernel`` selects the pure-Python
backend at import.
"""

import os
import sys

from setuptools import setup

ext_modules = []
if os.environ.get("BLLAB_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [Extension("bllab._kernel_c", ["src/bllab/_kernel_c.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3", "boundscheck": False,
                                 "wraparound": False, "cdivision": True},
        )
    except Exception as exc:  # pragma: no cover - build-environment dependent
        print(f"bllab: building without compiled kernel ({exc})", file=sys.stderr)
        ext_modules = []

setup(ext_modules=ext_modules)
