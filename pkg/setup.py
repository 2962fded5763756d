"""Builds the optional compiled kernel extension.

The package works without it (numpy fallback selected at import); the build
degrades gracefully when Cython or a C toolchain is missing.
"""

from setuptools import setup

ext_modules = []
try:
    import numpy
    from Cython.Build import cythonize

    ext_modules = cythonize(
        ["src/cogsim/_kernels.pyx"],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.include_dirs.append(numpy.get_include())
        ext.define_macros.append(("NPY_NO_DEPRECATED_API", "NPY_1_7_API_VERSION"))
        ext.extra_compile_args += ["-O3", "-march=native", "-ffast-math", "-mprefer-vector-width=512"]
        # -ffast-math vectorizes exp through glibc's libmvec
        ext.libraries += ["mvec", "m"]
except ImportError:
    pass

setup(ext_modules=ext_modules)
