from setuptools import setup

try:
    from Cython.Build import cythonize
except ImportError:
    # no Cython: the package runs on the pure-Python kernel
    ext_modules = []
else:
    from setuptools import Extension

    ext_modules = cythonize(
        [Extension("lasso_tradeoff._cd_kernel", ["src/lasso_tradeoff/_cd_kernel.pyx"], extra_compile_args=["-O3"])],
        compiler_directives={"language_level": "3"},
    )

setup(ext_modules=ext_modules)
