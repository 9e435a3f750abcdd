"""Numba kernels for packed GF(2) row reduction.

Rows are stored as little-endian uint64 words: column ``c`` lives in bit
``c & 63`` of word ``c >> 6``.
"""

import numba
import numpy as np

_ONE = np.uint64(1)


@numba.njit(cache=True)
def eliminate(w, ncols, reduce_above):
    """Row-reduce ``w`` in place; return the pivot columns.

    Pivot row is the first row (lowest index) at or below the current
    echelon row with a 1 in the column. With ``reduce_above`` the result
    is the reduced row echelon form, otherwise plain echelon form.
    """
    nrows, nw = w.shape
    pivots = np.empty(min(nrows, ncols), np.int64)
    r = 0
    for c in range(ncols):
        if r == nrows:
            break
        wi = c >> 6
        bit = _ONE << np.uint64(c & 63)
        piv = -1
        for i in range(r, nrows):
            if w[i, wi] & bit:
                piv = i
                break
        if piv < 0:
            continue
        if piv != r:
            for k in range(wi, nw):
                tmp = w[r, k]
                w[r, k] = w[piv, k]
                w[piv, k] = tmp
        start = 0 if reduce_above else r + 1
        for i in range(start, nrows):
            if i != r and (w[i, wi] & bit):
                for k in range(wi, nw):
                    w[i, k] ^= w[r, k]
        pivots[r] = c
        r += 1
    return pivots[:r]


@numba.njit(cache=True)
def rank_inplace(w, ncols):
    """GF(2) rank of ``w`` (destroys ``w``)."""
    return eliminate(w, ncols, False).shape[0]


@numba.njit(cache=True)
def matmul(a, b_words, b_cols):
    """Product of a dense 0/1 matrix ``a`` (r x k) with packed ``b`` (k rows)."""
    r, k = a.shape
    nw = b_words.shape[1]
    out = np.zeros((r, nw), np.uint64)
    for i in range(r):
        for j in range(k):
            if a[i, j]:
                for t in range(nw):
                    out[i, t] ^= b_words[j, t]
    return out
