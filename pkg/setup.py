"""Build the optional Cython quadrature core.

The extension is optional: if it fails to compile, the package falls back
to the numpy implementation in ``vekuabvp._kernels_py`` at import time.
"""
import os

from setuptools import setup

ext_modules = []
if not os.environ.get("VEKUABVP_NO_EXT"):
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension

        ext_modules = cythonize(
            [
                Extension(
                    "vekuabvp._kernels",
                    ["src/vekuabvp/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    extra_compile_args=["-O3"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )
    except Exception as exc:  # pragma: no cover - build environment dependent
        print(f"vekuabvp: building without compiled kernels ({exc})")
        ext_modules = []

setup(ext_modules=ext_modules)
