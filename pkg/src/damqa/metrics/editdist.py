"""Edit-distance backend selection.

Prefers the compiled kernel when the package was built with a C toolchain
and falls back to the pure-Python implementation otherwise. Both expose the
same ``levenshtein(a, b) -> int`` contract; ``BACKEND`` records which one is
active ("c" or "python").
"""

try:
    from damqa.metrics._editdist import levenshtein

    BACKEND = "c"
except ImportError:
    from damqa.metrics._editdist_py import levenshtein

    BACKEND = "python"

__all__ = ["levenshtein", "BACKEND"]
