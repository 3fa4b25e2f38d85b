# cython: language_level=3, boundscheck=False, wraparound=False
"""Levenshtein distance kernel: the two-row DP in C integers.

Semantics must match damqa.metrics._editdist_py.levenshtein exactly.
"""

from libc.stdlib cimport free, malloc


def levenshtein(str a, str b):
    """Minimum number of single-character edits transforming ``a`` into ``b``."""
    cdef Py_ssize_t la = len(a)
    cdef Py_ssize_t lb = len(b)
    if a == b:
        return 0
    if la < lb:
        a, b = b, a
        la, lb = lb, la
    if lb == 0:
        return la

    cdef int *prev = <int *> malloc((lb + 1) * sizeof(int))
    cdef int *curr = <int *> malloc((lb + 1) * sizeof(int))
    if prev == NULL or curr == NULL:
        if prev != NULL:
            free(prev)
        if curr != NULL:
            free(curr)
        raise MemoryError()

    cdef Py_ssize_t i, j
    cdef int best, sub
    cdef Py_UCS4 ca
    cdef int *tmp
    try:
        for j in range(lb + 1):
            prev[j] = <int> j
        for i in range(la):
            ca = a[i]
            curr[0] = <int> (i + 1)
            for j in range(1, lb + 1):
                sub = prev[j - 1]
                if ca != <Py_UCS4> b[j - 1]:
                    sub += 1
                best = sub
                if prev[j] + 1 < best:
                    best = prev[j] + 1
                if curr[j - 1] + 1 < best:
                    best = curr[j - 1] + 1
                curr[j] = best
            tmp = prev
            prev = curr
            curr = tmp
        return prev[lb]
    finally:
        free(prev)
        free(curr)
