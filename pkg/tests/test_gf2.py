import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

import oracles
from plaqsym import gf2
from plaqsym.gf2 import BinMatrix


def small_matrices(max_rows=12, max_cols=12):
    shapes = st.tuples(st.integers(0, max_rows), st.integers(1, max_cols))
    return shapes.flatmap(lambda s: arrays(np.uint8, s, elements=st.integers(0, 1)))


@given(small_matrices())
@settings(max_examples=200, deadline=None)
def test_rank_matches_row_space_enumeration(a):
    assert gf2.rank(BinMatrix.from_dense(a)) == oracles.rank(a)


@given(small_matrices(max_cols=10))
@settings(max_examples=100, deadline=None)
def test_nullspace_spans_exact_kernel(a):
    ns = gf2.nullspace(BinMatrix.from_dense(a)).to_dense()
    assert ns.shape[0] == a.shape[1]
    assert not np.any(a.astype(int) @ ns.astype(int) % 2)
    assert oracles.span(oracles.row_ints(ns.T)) == oracles.kernel(a)


@given(small_matrices(), st.data())
@settings(max_examples=100, deadline=None)
def test_zero_block_reduce_matches_enumeration(a, data):
    cols = a.shape[1]
    target = data.draw(st.lists(st.integers(0, cols - 1), unique=True))
    kept, elim = gf2.zero_block_reduce(BinMatrix.from_dense(a), target)
    mask = sum(1 << c for c in target)
    row_space = oracles.span(oracles.row_ints(a))
    vanishing = {v for v in row_space if v & mask == 0}
    k = kept.to_dense()
    assert k.shape[0] == oracles.log2_size(vanishing)
    assert oracles.span(oracles.row_ints(k)) == vanishing
    restricted = a[:, sorted(target)] if target else np.zeros((a.shape[0], 0), np.uint8)
    assert elim == (oracles.rank(restricted) if target and a.shape[0] else 0)


@given(small_matrices())
@settings(max_examples=100, deadline=None)
def test_rref_is_reduced_and_preserves_row_space(a):
    res = gf2.rref(BinMatrix.from_dense(a))
    r = res.matrix.to_dense()
    assert oracles.span(oracles.row_ints(r)) == oracles.span(oracles.row_ints(a))
    for row, col in enumerate(res.pivot_columns):
        assert r[row, col] == 1
        assert r[:, col].sum() == 1
        assert not r[row, :col].any()
    assert list(res.pivot_columns) == sorted(res.pivot_columns)
    assert not r[res.rank :].any()


@pytest.mark.parametrize("cols", [1, 63, 64, 65, 128, 200])
def test_packing_round_trip_across_word_boundaries(cols, rng):
    a = rng.integers(0, 2, size=(7, cols), dtype=np.uint8)
    m = BinMatrix.from_dense(a)
    assert np.array_equal(m.to_dense(), a)
    assert BinMatrix.from_text(m.to_text()) == m
    assert np.array_equal(m.T.to_dense(), a.T)


def test_identity_rank_and_empty_nullspace():
    assert gf2.rank(BinMatrix.identity(70)) == 70
    assert gf2.nullspace(BinMatrix.identity(70)).shape == (70, 0)


def test_known_example_rank_two():
    m = BinMatrix.from_text("110\n011\n101")
    assert gf2.rank(m) == 2
    assert gf2.nullspace(m).to_dense().T.tolist() == [[1, 1, 1]]


def test_matmul_matches_dense(rng):
    a = rng.integers(0, 2, size=(9, 70), dtype=np.uint8)
    b = rng.integers(0, 2, size=(70, 66), dtype=np.uint8)
    got = (BinMatrix.from_dense(a) @ BinMatrix.from_dense(b)).to_dense()
    assert np.array_equal(got, a.astype(int) @ b.astype(int) % 2)


def test_restricted_rank_agrees_with_restrict_columns(rng):
    a = BinMatrix.from_dense(rng.integers(0, 2, size=(20, 90), dtype=np.uint8))
    cols = rng.choice(90, size=30, replace=False)
    assert gf2.restricted_rank(a, cols) == gf2.rank(gf2.restrict_columns(a, cols))


def test_random_combination_is_nonzero_element_of_span(rng):
    a = np.array([[1, 0, 1, 1], [0, 1, 1, 0], [1, 1, 0, 1], [0, 0, 0, 0], [1, 0, 0, 0], [0, 0, 1, 1]], np.uint8)
    allowed = oracles.span(oracles.row_ints(a.T)) - {0}
    for _ in range(20):
        v = gf2.random_combination(BinMatrix.from_dense(a), rng)
        assert oracles.row_ints(v[None, :])[0] in allowed


def test_random_combination_of_trivial_group_raises(rng):
    with pytest.raises(ValueError):
        gf2.random_combination(BinMatrix.zeros(4, 2), rng)


@pytest.mark.parametrize(
    "bad",
    [lambda: BinMatrix(np.zeros((2, 2), np.uint64), 10), lambda: BinMatrix.from_text("10\n1"), lambda: BinMatrix(np.full((1, 1), 8, np.uint64), 3)],
)
def test_malformed_inputs_raise(bad):
    with pytest.raises(ValueError):
        bad()


def test_out_of_range_columns_raise():
    m = BinMatrix.identity(3)
    with pytest.raises(IndexError):
        gf2.restrict_columns(m, [3])
    with pytest.raises(IndexError):
        gf2.zero_block_reduce(m, [5])
