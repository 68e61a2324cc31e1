"""Pure-Python kernels; the fallback twin of ``_speedups``."""

from __future__ import annotations


def lcs_len(a, b) -> int:
    """Length of the longest common contiguous run between two id sequences."""
    m, n = len(a), len(b)
    if m == 0 or n == 0:
        return 0
    best = 0
    prev = [0] * (n + 1)
    for i in range(1, m + 1):
        cur = [0] * (n + 1)
        ai = a[i - 1]
        for j in range(1, n + 1):
            if ai == b[j - 1]:
                v = prev[j - 1] + 1
                cur[j] = v
                if v > best:
                    best = v
        prev = cur
    return best


def best_span(st, ed, max_len: int) -> tuple[int, int]:
    """Argmax of st[i] + ed[j] over i <= j < i + max_len.

    Ties go to the smaller i, then the smaller j (first maximum in
    lexicographic scan order).
    """
    n = len(st)
    best_i = 0
    best_j = 0
    best_score = st[0] + ed[0]
    for i in range(n):
        sti = st[i]
        stop = min(i + max_len, n)
        for j in range(i, stop):
            score = sti + ed[j]
            if score > best_score:
                best_score = score
                best_i = i
                best_j = j
    return best_i, best_j
