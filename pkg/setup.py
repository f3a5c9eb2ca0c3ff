from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
except ImportError:
    # Pure-Python install: the simulator falls back to its Python core.
    ext_modules = []
else:
    ext_modules = cythonize(
        [
            Extension(
                "sfcsym.simulator._core",
                ["src/sfcsym/simulator/_core.pyx"],
                optional=True,
            )
        ],
        language_level="3",
    )

setup(ext_modules=ext_modules)
