"""Dense bit-packed matrices over GF(2).

`BinMatrix` stores each row as a run of uint64 words. Every operation
returns a new matrix; the word array of an existing matrix is never
written to after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Sequence

import numpy as np

from . import _kernels

WORD_BITS = 64


def _nwords(cols: int) -> int:
    return (cols + WORD_BITS - 1) // WORD_BITS


def _pack(dense: np.ndarray) -> np.ndarray:
    rows, cols = dense.shape
    nw = _nwords(cols)
    padded = np.zeros((rows, nw * WORD_BITS), dtype=np.uint8)
    padded[:, :cols] = dense & 1
    packed = np.packbits(padded, axis=1, bitorder="little")
    return np.ascontiguousarray(packed).view("<u8").astype(np.uint64, copy=False).reshape(rows, nw)


def _unpack(words: np.ndarray, cols: int) -> np.ndarray:
    rows = words.shape[0]
    if cols == 0 or rows == 0:
        return np.zeros((rows, cols), dtype=np.uint8)
    as_bytes = np.ascontiguousarray(words).view(np.uint8).reshape(rows, -1)
    return np.unpackbits(as_bytes, axis=1, bitorder="little")[:, :cols]


class BinMatrix:
    """A ``rows x cols`` matrix over GF(2), rows packed into uint64 words."""

    __slots__ = ("rows", "cols", "words")

    def __init__(self, words: np.ndarray, cols: int):
        words = np.ascontiguousarray(words, dtype=np.uint64)
        if words.ndim != 2 or words.shape[1] != _nwords(cols):
            raise ValueError(f"word array of shape {words.shape} does not hold {cols} columns")
        tail = cols % WORD_BITS
        if tail and words.shape[0] and np.any(words[:, -1] >> np.uint64(tail)):
            raise ValueError("bits set beyond the last column")
        words.setflags(write=False)
        self.rows = int(words.shape[0])
        self.cols = int(cols)
        self.words = words

    @classmethod
    def from_dense(cls, a) -> BinMatrix:
        a = np.asarray(a)
        if a.ndim == 1:
            a = a[None, :]
        if a.ndim != 2:
            raise ValueError("expected a 2D array")
        return cls(_pack(a.astype(np.uint8) & 1), a.shape[1])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> BinMatrix:
        return cls(np.zeros((rows, _nwords(cols)), np.uint64), cols)

    @classmethod
    def identity(cls, n: int) -> BinMatrix:
        return cls.from_dense(np.eye(n, dtype=np.uint8))

    @classmethod
    def from_text(cls, text: str) -> BinMatrix:
        """Parse one line of '0'/'1' characters per row (blank lines ignored)."""
        lines = [ln.strip() for ln in text.splitlines() if ln.strip()]
        if not lines:
            return cls.zeros(0, 0)
        width = len(lines[0])
        if any(len(ln) != width for ln in lines) or any(set(ln) - {"0", "1"} for ln in lines):
            raise ValueError("rows must be equal-length strings of 0/1")
        dense = np.array([[ch == "1" for ch in ln] for ln in lines], dtype=np.uint8)
        return cls.from_dense(dense)

    def to_text(self) -> str:
        return "\n".join("".join("1" if b else "0" for b in row) for row in self.to_dense())

    def to_dense(self) -> np.ndarray:
        return _unpack(self.words, self.cols)

    @property
    def shape(self) -> tuple[int, int]:
        return self.rows, self.cols

    @property
    def T(self) -> BinMatrix:
        return BinMatrix.from_dense(self.to_dense().T)

    def row(self, i: int) -> np.ndarray:
        return _unpack(self.words[i : i + 1], self.cols)[0]

    def take_rows(self, idx) -> BinMatrix:
        return BinMatrix(self.words[np.asarray(idx, dtype=np.int64)], self.cols)

    def is_zero(self) -> bool:
        return not np.any(self.words)

    def __matmul__(self, other: BinMatrix) -> BinMatrix:
        if self.cols != other.rows:
            raise ValueError(f"shape mismatch {self.shape} @ {other.shape}")
        return BinMatrix(_kernels.matmul(self.to_dense(), other.words, other.cols), other.cols)

    def __eq__(self, other) -> bool:
        if not isinstance(other, BinMatrix):
            return NotImplemented
        return self.shape == other.shape and np.array_equal(self.words, other.words)

    def __hash__(self):
        return hash((self.rows, self.cols, self.words.tobytes()))

    def __repr__(self) -> str:
        return f"BinMatrix({self.rows}x{self.cols})"


def hstack(mats: Sequence[BinMatrix]) -> BinMatrix:
    return BinMatrix.from_dense(np.hstack([m.to_dense() for m in mats]))


def vstack(mats: Sequence[BinMatrix]) -> BinMatrix:
    cols = {m.cols for m in mats}
    if len(cols) != 1:
        raise ValueError("column counts differ")
    return BinMatrix(np.vstack([m.words for m in mats]), cols.pop())


@dataclass(frozen=True)
class RrefResult:
    matrix: BinMatrix
    pivot_columns: tuple[int, ...]

    @property
    def rank(self) -> int:
        return len(self.pivot_columns)


def rref(m: BinMatrix) -> RrefResult:
    """Reduced row echelon form. Zero rows are kept at the bottom."""
    w = m.words.copy()
    piv = _kernels.eliminate(w, m.cols, True)
    return RrefResult(BinMatrix(w, m.cols), tuple(int(c) for c in piv))


def rank(m: BinMatrix) -> int:
    if m.rows == 0 or m.cols == 0:
        return 0
    return int(_kernels.rank_inplace(m.words.copy(), m.cols))


def row_basis(m: BinMatrix) -> BinMatrix:
    """Independent rows spanning the row space of ``m`` (its nonzero RREF rows)."""
    res = rref(m)
    return res.matrix.take_rows(np.arange(res.rank))


def nullspace(m: BinMatrix) -> BinMatrix:
    """Basis of {x : m x = 0} as the columns of a ``cols x (cols - rank)`` matrix.

    Columns follow the free (non-pivot) columns of the RREF in ascending order:
    the column for free index f has a 1 at f and the pivot entries copied from
    the RREF, i.e. the (C; I) block construction with rows mapped back to the
    original column labels.
    """
    n = m.cols
    res = rref(m)
    pivots = np.asarray(res.pivot_columns, dtype=np.int64)
    free = np.setdiff1d(np.arange(n), pivots)
    t = np.zeros((n, free.size), dtype=np.uint8)
    if free.size:
        t[free, np.arange(free.size)] = 1
        if pivots.size:
            r = res.matrix.take_rows(np.arange(pivots.size)).to_dense()
            t[pivots, :] = r[:, free]
    return BinMatrix.from_dense(t)


def restrict_columns(m: BinMatrix, cols: Iterable[int]) -> BinMatrix:
    idx = np.asarray(list(cols) if not isinstance(cols, np.ndarray) else cols, dtype=np.int64)
    if idx.size and (idx.min() < 0 or idx.max() >= m.cols):
        raise IndexError("column index out of range")
    return BinMatrix.from_dense(m.to_dense()[:, idx])


def restricted_rank(m: BinMatrix, cols) -> int:
    """``rank(restrict_columns(m, cols))`` without building the intermediate object."""
    idx = np.asarray(cols, dtype=np.int64)
    if idx.size == 0 or m.rows == 0:
        return 0
    sub = m.to_dense()[:, idx]
    return int(_kernels.rank_inplace(_pack(sub), idx.size))


def zero_block_reduce(t_bd: BinMatrix, target_cols) -> tuple[BinMatrix, int]:
    """Split the row space of ``t_bd`` by its restriction to ``target_cols``.

    Row reduction with the target columns eliminated first brings the matrix to
    the block form (Q0 Qt; Q1 0). Returns ``(kept, eliminated)`` where the rows
    of ``kept`` (all original columns, zero on the targets) form a basis of the
    subspace vanishing on the targets and ``eliminated`` is the rank of the
    target block.
    """
    target = np.unique(np.asarray(list(target_cols), dtype=np.int64))
    if target.size and (target.min() < 0 or target.max() >= t_bd.cols):
        raise IndexError("target column out of range")
    rest = np.setdiff1d(np.arange(t_bd.cols), target)
    order = np.concatenate([target, rest])
    dense = t_bd.to_dense()[:, order]
    w = _pack(dense)
    piv = _kernels.eliminate(w, t_bd.cols, True)
    n_target = int(np.count_nonzero(piv < target.size))
    kept_perm = _unpack(w[n_target : piv.size], t_bd.cols)
    kept = np.zeros_like(kept_perm)
    kept[:, order] = kept_perm
    return BinMatrix.from_dense(kept) if kept.size else BinMatrix.zeros(0, t_bd.cols), n_target


def random_combination(t: BinMatrix, rng: np.random.Generator, include_identity: bool = False) -> np.ndarray:
    """Uniformly random element of the column span of ``t`` as a 0/1 vector."""
    basis = row_basis(t.T).to_dense()
    k = basis.shape[0]
    if k == 0:
        if include_identity:
            return np.zeros(t.rows, dtype=np.uint8)
        raise ValueError("trivial group: the column span has no nonzero element")
    while True:
        alpha = rng.integers(0, 2, size=k, dtype=np.uint8)
        if include_identity or alpha.any():
            return (alpha @ basis.astype(np.int64) & 1).astype(np.uint8)
