"""Build script: compiles the optional Cython kernels.

The package works without the compiled extension (a pure-Python fallback is
selected at import time), so any failure here degrades to a source-only
install rather than aborting it.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "sizedist._kernels",
                ["src/sizedist/_kernels.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except Exception as exc:  # pragma: no cover - build-environment dependent
    print(f"sizedist: skipping compiled kernels ({exc}); pure-Python fallback will be used")

setup(ext_modules=ext_modules)
