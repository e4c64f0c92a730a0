"""Build script: compiles the Ryser permanent kernel when Cython is available.

The package works without the extension; noonchip.kernels falls back to a
pure numpy implementation at import time.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    cythonize = None

extensions = []
if cythonize is not None:
    extensions = cythonize(
        [
            Extension(
                "noonchip._ryser",
                ["src/noonchip/_ryser.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level="3",
    )

setup(ext_modules=extensions)
