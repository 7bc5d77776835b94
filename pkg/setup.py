import os

from setuptools import Extension, setup

ext_modules = []
if os.environ.get("RDFX_PURE_PYTHON") != "1":
    try:
        from Cython.Build import cythonize
    except ImportError:  # build without the compiled kernels
        pass
    else:
        ext_modules = cythonize(
            [Extension("rdfexchange._kernels", ["src/rdfexchange/_kernels.pyx"],
                       extra_compile_args=["-O3"])],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
