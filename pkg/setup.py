"""Build script: compiles the optional edit-distance C extension.

The extension is a pure speedup; if Cython or a C toolchain is missing the
install proceeds and the package falls back to the Python implementation
(see damqa.metrics.editdist). Set DAMQA_PURE_PYTHON=1 to skip the build.
"""

import os

from setuptools import Extension, setup
from setuptools.command.build_ext import build_ext


class optional_build_ext(build_ext):
    """build_ext that downgrades compilation failures to a warning."""

    def run(self):
        try:
            super().run()
        except Exception as exc:  # missing compiler, broken toolchain
            print(f"warning: C extension build skipped ({exc}); "
                  "using pure-Python edit distance")

    def build_extension(self, ext):
        try:
            super().build_extension(ext)
        except Exception as exc:
            print(f"warning: failed to build {ext.name} ({exc}); "
                  "using pure-Python edit distance")


def extensions():
    if os.environ.get("DAMQA_PURE_PYTHON"):
        return []
    try:
        from Cython.Build import cythonize
    except ImportError:
        return []
    return cythonize(
        [Extension("damqa.metrics._editdist", ["src/damqa/metrics/_editdist.pyx"])],
        compiler_directives={
            "language_level": 3,
            "boundscheck": False,
            "wraparound": False,
        },
    )


setup(
    ext_modules=extensions(),
    cmdclass={"build_ext": optional_build_ext},
)
