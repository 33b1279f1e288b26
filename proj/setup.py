from pybind11.setup_helpers import Pybind11Extension, build_ext
from setuptools import setup

core_sources = [
    "src/text.cpp",
    "src/embedding.cpp",
    "src/metrics.cpp",
    "src/nmiss.cpp",
    "src/rag.cpp",
    "src/http_clients.cpp",
    "src/ingest.cpp",
    "src/report.cpp",
    "src/config.cpp",
]

ext = Pybind11Extension(
    "halleval._core",
    sources=["bindings/module.cpp"] + core_sources,
    include_dirs=["include", "vendor"],
    cxx_std=20,
    libraries=["pthread"],
)

setup(ext_modules=[ext], cmdclass={"build_ext": build_ext})
