from setuptools import Extension, setup

try:
    from Cython.Build import cythonize

    ext_modules = cythonize(
        [
            Extension(
                "flowgames._speedups",
                ["src/flowgames/_speedups.pyx"],
                extra_compile_args=["-O3"],
            )
        ],
        language_level=3,
    )
except ImportError:
    # the package still works: kernels.py selects the pure-Python backend
    ext_modules = []

# metadata mirrors pyproject.toml so pre-PEP-621 setuptools still builds a
# correct wheel under --no-build-isolation
setup(
    name="flowgames",
    version="0.1.0",
    package_dir={"": "src"},
    packages=["flowgames"],
    entry_points={"console_scripts": ["flowgames = flowgames.cli:main"]},
    ext_modules=ext_modules,
)
