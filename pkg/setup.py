import os

from setuptools import setup

ext_modules = []
if os.environ.get("AMRPE_NO_EXT", "") != "1":
    try:
        import numpy as np
        from Cython.Build import cythonize
        from setuptools import Extension
    except ImportError:
        pass
    else:
        ext_modules = cythonize(
            [
                Extension(
                    "amrpe._ext._kernels",
                    ["src/amrpe/_ext/_kernels.pyx"],
                    include_dirs=[np.get_include()],
                    # bit-identity with the numpy fallback needs unfused multiply-add
                    extra_compile_args=["-O2", "-ffp-contract=off"],
                )
            ],
            compiler_directives={"language_level": "3"},
        )

setup(ext_modules=ext_modules)
