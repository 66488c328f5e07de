"""Builds the optional compiled packing kernel; the package works without it."""
import os

from setuptools import setup

ext_modules = []
if os.environ.get("BLO_AUCTION_PURE") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [Extension("blo_auction._packing", ["src/blo_auction/_packing.pyx"],
                       include_dirs=[np.get_include()],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
