from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

ext = Pybind11Extension(
    "hdckit._core",
    sources=[
        "bindings/py_module.cpp",
        "src/hypervector.cpp",
        "src/encoder.cpp",
        "src/classifier.cpp",
        "src/train_classic.cpp",
        "src/train_lehdc.cpp",
        "src/data_io.cpp",
    ],
    include_dirs=["include", "vendor"],
    cxx_std=20,
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
