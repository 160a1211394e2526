"""Build hook for the optional compiled raster kernel.

The package is fully functional without the extension; palsim.rasterize
falls back to the pure-Python kernel when the compiled one is absent.
"""

from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [Extension("palsim._rasterize", ["src/palsim/_rasterize.pyx"])],
        language_level="3",
    )
except Exception:
    ext_modules = []

setup(ext_modules=ext_modules)
