from setuptools import setup, Extension
from Cython.Build import cythonize
import numpy as np


ext_module = Extension(
    "stokes_wkb._numerov",
    ["src/stokes_wkb/_numerov.pyx"],
    include_dirs=[np.get_include()],
)


setup(
    ext_modules=cythonize(ext_module, compiler_directives={"language_level": 3}),
)
