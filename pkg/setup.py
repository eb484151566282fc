from setuptools import Extension, setup

try:
    from Cython.Build import cythonize
    ext_modules = cythonize(
        [Extension("fermionic_nuclearity._kernels", ["src/fermionic_nuclearity/_kernels.pyx"])],
        compiler_directives={"language_level": "3"},
    )
    for ext in ext_modules:
        ext.optional = True  # fall back to the numpy kernels if compilation fails
except ImportError:
    ext_modules = []

setup(ext_modules=ext_modules)
