"""Hot scoring kernels with a compiled core and a pure-Python fallback.

The compiled ``_speedups`` extension is picked at import when available;
``ACCKIT_PURE=1`` forces the pure twin. Both expose identical semantics
(see tests/test_kernels.py for the parity checks).
"""

from __future__ import annotations

import os
from array import array
from typing import Sequence

from . import _pure

if os.environ.get("ACCKIT_PURE"):
    _impl = _pure
    BACKEND = "pure"
else:
    try:
        from . import _speedups as _impl  # type: ignore[no-redef]

        BACKEND = "compiled"
    except ImportError:
        _impl = _pure
        BACKEND = "pure"


def lcs_word_length(a_words: Sequence[str], b_words: Sequence[str]) -> int:
    """Length of the longest common contiguous word run between two spans."""
    if not a_words or not b_words:
        return 0
    ids: dict[str, int] = {}
    a = array("i", (ids.setdefault(w, len(ids)) for w in a_words))
    # Words absent from `a` can never match; one shared sentinel is enough
    # because the DP only compares across the two sequences.
    b = array("i", (ids.get(w, -1) for w in b_words))
    return _impl.lcs_len(a, b)


def best_span(st: Sequence[float], ed: Sequence[float], max_span_words: int) -> tuple[int, int]:
    """Best (i, j) word pair maximizing st[i] + ed[j] with i <= j and a length cap."""
    if len(st) == 0 or len(ed) == 0:
        raise ValueError("empty span score arrays")
    if len(st) != len(ed):
        raise ValueError(f"start/end score lengths differ: {len(st)} != {len(ed)}")
    if max_span_words < 1:
        raise ValueError("max_span_words must be >= 1")
    return _impl.best_span(array("d", st), array("d", ed), max_span_words)
