"""Build the optional compiled hexagon kernel.

The package works without it; ``bordered_yamabe.kernel`` falls back to the
NumPy implementation when the extension cannot be imported.
"""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("BORDERED_YAMABE_NO_EXT") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:
        cythonize = None
    if cythonize is not None:
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "bordered_yamabe._hexcore",
                    ["src/bordered_yamabe/_hexcore.pyx"],
                    extra_compile_args=["-O3", "-fno-math-errno"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
