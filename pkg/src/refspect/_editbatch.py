"""Batched edit-distance computation for the clustering hot path.

Falls back to the pure-Python implementation when numba is missing;
both paths return identical integer distances.
"""

from __future__ import annotations

from .references import levenshtein

try:
    import numpy as np
    from numba import njit, prange

    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - exercised only without numba
    HAVE_NUMBA = False

# Below this many pairs the numpy marshalling costs more than it saves.
_MIN_BATCH = 64

if HAVE_NUMBA:

    @njit(cache=True, parallel=True)
    def _distance_kernel(codes, lengths, left, right, out):  # pragma: no cover - jit
        for p in prange(len(left)):
            i = left[p]
            j = right[p]
            la = lengths[i]
            lb = lengths[j]
            if la == 0:
                out[p] = lb
                continue
            if lb == 0:
                out[p] = la
                continue
            row = np.empty(lb + 1, dtype=np.int32)
            for y in range(lb + 1):
                row[y] = y
            for x in range(1, la + 1):
                prev_diag = row[0]
                row[0] = x
                ca = codes[i, x - 1]
                for y in range(1, lb + 1):
                    tmp = row[y]
                    if ca == codes[j, y - 1]:
                        sub = prev_diag
                    else:
                        sub = prev_diag + 1
                    best = row[y] + 1
                    if row[y - 1] + 1 < best:
                        best = row[y - 1] + 1
                    if sub < best:
                        best = sub
                    row[y] = best
                    prev_diag = tmp
            out[p] = row[lb]


def batch_distances(strings: list[str], pairs: list[tuple[int, int]]) -> list[int]:
    """Edit distances for index pairs into ``strings``."""
    if not pairs:
        return []
    if not HAVE_NUMBA or len(pairs) < _MIN_BATCH:
        return [levenshtein(strings[i], strings[j]) for i, j in pairs]

    maxlen = max(len(s) for s in strings)
    codes = np.zeros((len(strings), max(maxlen, 1)), dtype=np.uint32)
    lengths = np.empty(len(strings), dtype=np.int32)
    for idx, s in enumerate(strings):
        lengths[idx] = len(s)
        for k, ch in enumerate(s):
            codes[idx, k] = ord(ch)
    left = np.fromiter((i for i, _ in pairs), dtype=np.int64, count=len(pairs))
    right = np.fromiter((j for _, j in pairs), dtype=np.int64, count=len(pairs))
    out = np.empty(len(pairs), dtype=np.int32)
    _distance_kernel(codes, lengths, left, right, out)
    return out.tolist()
