"""Build shim: compiles the optional n-gram kernel extension.

The package works without the extension (a pure-Python mirror is selected
at import time), so any failure here degrades to the fallback instead of
blocking installation.
"""

from setuptools import setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        "src/countersel/_kernels_cy.pyx",
        compiler_directives={"language_level": "3"},
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"countersel: skipping compiled kernels ({exc!r}); pure-Python fallback will be used")
    ext_modules = []

setup(ext_modules=ext_modules)
