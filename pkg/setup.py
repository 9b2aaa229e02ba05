"""Build hook: compiles the optional C extension for the physics hot loop.

The package works without it (palmland.kernels falls back to the pure-Python
twin), so any failure here downgrades to a source-only install instead of
aborting.
"""

from setuptools import Extension, setup

ext_modules = []
try:
    from Cython.Build import cythonize

    # -ffp-contract=off keeps the compiled kernel bit-identical to the
    # pure-Python twin (no FMA contraction); parity tests rely on it.
    ext_modules = cythonize(
        [
            Extension(
                "palmland._kernels",
                ["src/palmland/_kernels.pyx"],
                extra_compile_args=["-O2", "-ffp-contract=off"],
            )
        ],
        language_level=3,
    )
except ImportError:
    pass

setup(ext_modules=ext_modules)
