# cython: language_level=3, boundscheck=False, wraparound=False
"""Compiled kernels; behavior mirrors ``_pure`` exactly."""

from libc.stdlib cimport calloc, free


def lcs_len(const int[::1] a, const int[::1] b) -> int:
    """Length of the longest common contiguous run between two id sequences."""
    cdef Py_ssize_t m = a.shape[0]
    cdef Py_ssize_t n = b.shape[0]
    if m == 0 or n == 0:
        return 0
    cdef int *prev = <int *> calloc(n + 1, sizeof(int))
    cdef int *cur = <int *> calloc(n + 1, sizeof(int))
    if prev == NULL or cur == NULL:
        free(prev)
        free(cur)
        raise MemoryError()
    cdef int best = 0, v
    cdef int ai
    cdef Py_ssize_t i, j
    cdef int *tmp
    try:
        for i in range(1, m + 1):
            ai = a[i - 1]
            for j in range(1, n + 1):
                if ai == b[j - 1]:
                    v = prev[j - 1] + 1
                    cur[j] = v
                    if v > best:
                        best = v
                else:
                    cur[j] = 0
            tmp = prev
            prev = cur
            cur = tmp
    finally:
        free(prev)
        free(cur)
    return best


def best_span(const double[::1] st, const double[::1] ed, Py_ssize_t max_len):
    """Argmax of st[i] + ed[j] over i <= j < i + max_len, first-maximum ties."""
    cdef Py_ssize_t n = st.shape[0]
    cdef Py_ssize_t best_i = 0, best_j = 0
    cdef double best_score = st[0] + ed[0]
    cdef double sti, score
    cdef Py_ssize_t i, j, stop
    for i in range(n):
        sti = st[i]
        stop = i + max_len
        if stop > n:
            stop = n
        for j in range(i, stop):
            score = sti + ed[j]
            if score > best_score:
                best_score = score
                best_i = i
                best_j = j
    return best_i, best_j
