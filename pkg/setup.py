from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # No Cython at build time: install the pure-Python package only.
    # lieflow._backend falls back to the Python kernels at import.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "lieflow._kernels",
                ["src/lieflow/_kernels.pyx"],
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

setup(ext_modules=ext_modules)
