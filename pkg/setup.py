"""Build the optional compiled Ryser kernel.

The package works without it: ``permabound.permanent`` falls back to the
numpy kernel when ``permabound._ryser`` cannot be imported.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:  # pragma: no cover - build without Cython
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "permabound._ryser",
                ["src/permabound/_ryser.pyx"],
                extra_compile_args=["-O3"],
                optional=True,
            )
        ],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
