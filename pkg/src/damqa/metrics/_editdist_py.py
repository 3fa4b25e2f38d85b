"""Pure-Python Levenshtein distance (two-row dynamic programming).

Reference implementation for the compiled kernel in ``_editdist.pyx``; both
must return identical values for all string pairs.
"""


def levenshtein(a: str, b: str) -> int:
    """Minimum number of single-character insertions, deletions and
    substitutions that transform ``a`` into ``b``."""
    if a == b:
        return 0
    # Keep the inner loop over the shorter string.
    if len(a) < len(b):
        a, b = b, a
    if not b:
        return len(a)
    prev = list(range(len(b) + 1))
    for i, ca in enumerate(a, start=1):
        curr = [i]
        for j, cb in enumerate(b, start=1):
            sub = prev[j - 1] + (ca != cb)
            dele = prev[j] + 1
            ins = curr[-1] + 1
            curr.append(min(sub, dele, ins))
        prev = curr
    return prev[-1]
