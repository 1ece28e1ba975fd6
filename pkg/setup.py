import numpy as np
from setuptools import setup, Extension
from Cython.Build import cythonize

ext = Extension(
    "sqcav._rk45",
    ["src/sqcav/_rk45.pyx"],
    include_dirs=[np.get_include()],
    extra_compile_args=["-O3", "-fcx-limited-range", "-fno-math-errno"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
)

setup(ext_modules=cythonize([ext], language_level=3))
