import os

import numpy
from Cython.Build import cythonize
from setuptools import Extension, setup

# numpy's C entry points for Generator draws live in a static library
_npyrandom_dir = os.path.abspath(
    os.path.join(numpy.get_include(), "..", "..", "random", "lib")
)

# -ffp-contract=off keeps the compiled kernel bit-identical to the pure-Python
# fallback (FMA contraction would change rounding in the sampler recursions).
ext = Extension(
    "taulatent._chain",
    ["src/taulatent/_chain.pyx"],
    include_dirs=[numpy.get_include()],
    library_dirs=[_npyrandom_dir],
    libraries=["npyrandom"],
    define_macros=[("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION")],
    extra_compile_args=["-O3", "-ffp-contract=off"],
)

setup(ext_modules=cythonize([ext], language_level=3))
