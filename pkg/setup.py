from setuptools import Extension, setup
from Cython.Build import cythonize

setup(
    ext_modules=cythonize(
        [
            Extension(
                "mp3s_eval._kernels._dtw_cy",
                ["src/mp3s_eval/_kernels/_dtw_cy.pyx"],
            )
        ],
        language_level="3",
    ),
)
