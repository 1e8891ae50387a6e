"""Tests for dense GF(2) linear algebra."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from folqec import gf2

# Steane code: Z-stabiliser supports, all-ones logical, and one published
# choice of syndrome pseudo-inverse satisfying the square orthogonality
# product.
STEANE_H = np.array(
    [
        [1, 1, 0, 0, 0, 1, 1],
        [0, 1, 1, 1, 0, 0, 1],
        [0, 0, 0, 1, 1, 1, 1],
    ],
    dtype=np.uint8,
)
STEANE_G = np.ones((1, 7), dtype=np.uint8)
STEANE_ISF = np.array(
    [
        [0, 1, 1, 0, 0, 0, 0],
        [1, 1, 0, 0, 0, 0, 0],
        [0, 0, 1, 1, 0, 0, 0],
    ],
    dtype=np.uint8,
)


def naive_matmul(a, b):
    """Oracle: triple-loop GF(2) matrix product."""
    a = np.asarray(a)
    b = np.asarray(b)
    out = np.zeros((a.shape[0], b.shape[1]), dtype=np.uint8)
    for i in range(a.shape[0]):
        for j in range(b.shape[1]):
            acc = 0
            for k in range(a.shape[1]):
                acc ^= int(a[i, k]) & int(b[k, j])
            out[i, j] = acc
    return out


def span_size(rows):
    """Oracle: number of distinct vectors in the row span, by enumeration."""
    rows = np.asarray(rows, dtype=np.uint8)
    seen = set()
    for picks in itertools.product([0, 1], repeat=rows.shape[0]):
        v = np.zeros(rows.shape[1], dtype=np.uint8)
        for c, r in zip(picks, rows):
            if c:
                v ^= r
        seen.add(v.tobytes())
    return len(seen)


bit_matrix = hnp.arrays(np.uint8, hnp.array_shapes(min_dims=2, max_dims=2, min_side=1, max_side=8), elements=st.integers(0, 1))


class TestMatmul:
    def test_identity(self):
        eye = np.eye(3, dtype=np.uint8)
        assert np.array_equal(gf2.matmul(eye, eye), eye)

    def test_steane_pseudo_inverse(self):
        assert np.array_equal(gf2.matmul(STEANE_H, STEANE_ISF.T), np.eye(3, dtype=np.uint8))

    def test_matches_naive_oracle(self):
        rng = np.random.default_rng(7)
        for _ in range(20):
            a = rng.integers(0, 2, size=(4, 6), dtype=np.uint8)
            b = rng.integers(0, 2, size=(6, 2), dtype=np.uint8)
            assert np.array_equal(gf2.matmul(a, b), naive_matmul(a, b))

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            gf2.matmul(np.zeros((2, 3), dtype=np.uint8), np.zeros((4, 2), dtype=np.uint8))

    def test_vector_rhs(self):
        v = np.array([1, 0, 1, 1, 0, 1, 1], dtype=np.uint8)
        assert gf2.matmul(STEANE_H, v).shape == (3,)


class TestRowReduce:
    def test_zero_matrix(self):
        _, rank, pivots = gf2.row_reduce(np.zeros((3, 4), dtype=np.uint8))
        assert rank == 0 and pivots == []

    def test_steane_rank(self):
        assert gf2.row_reduce(STEANE_H)[1] == 3

    def test_rank_matches_span_enumeration(self):
        rng = np.random.default_rng(11)
        for _ in range(20):
            m = rng.integers(0, 2, size=(5, 6), dtype=np.uint8)
            _, rank, _ = gf2.row_reduce(m)
            assert 2**rank == span_size(m)

    @given(bit_matrix)
    @settings(max_examples=60, deadline=None)
    def test_idempotent(self, m):
        red1, rank1, piv1 = gf2.row_reduce(m)
        red2, rank2, piv2 = gf2.row_reduce(red1)
        assert np.array_equal(red1, red2)
        assert rank1 == rank2 and piv1 == piv2

    @given(bit_matrix)
    @settings(max_examples=60, deadline=None)
    def test_preserves_row_space(self, m):
        red, rank, _ = gf2.row_reduce(m)
        for row in m:
            assert gf2.in_row_space(red[:rank] if rank else np.zeros((1, m.shape[1]), np.uint8), row)


class TestSolve:
    def test_identity_system(self):
        s = np.array([1, 0, 1], dtype=np.uint8)
        assert np.array_equal(gf2.solve(np.eye(3, dtype=np.uint8), s), s)

    def test_steane_pure_error(self):
        s = np.array([1, 0, 0], dtype=np.uint8)
        x = gf2.solve(STEANE_H, s)
        assert np.array_equal(gf2.matmul(STEANE_H, x), s)
        # The published pseudo-inverse maps this syndrome to support {c2, c3}.
        e0 = gf2.matmul(STEANE_ISF.T, s)
        assert np.array_equal(e0, [0, 1, 1, 0, 0, 0, 0])

    def test_random_consistent_systems(self):
        rng = np.random.default_rng(3)
        for _ in range(30):
            a = rng.integers(0, 2, size=(5, 8), dtype=np.uint8)
            x_true = rng.integers(0, 2, size=8, dtype=np.uint8)
            s = gf2.matmul(a, x_true)
            x = gf2.solve(a, s)
            assert x is not None
            assert np.array_equal(gf2.matmul(a, x), s)

    def test_inconsistent_system(self):
        a = np.array([[1, 1], [1, 1]], dtype=np.uint8)
        assert gf2.solve(a, np.array([1, 0], dtype=np.uint8)) is None


class TestKernelBasis:
    def test_dimension(self):
        rng = np.random.default_rng(5)
        for _ in range(20):
            a = rng.integers(0, 2, size=(4, 7), dtype=np.uint8)
            basis = gf2.kernel_basis(a)
            _, rank, _ = gf2.row_reduce(a)
            assert basis.shape[0] == 7 - rank
            if basis.size:
                assert not np.any(gf2.matmul(a, basis.T))
                assert gf2.row_reduce(basis)[1] == basis.shape[0]


class TestOrthonormalComplete:
    def test_empty_duals(self):
        out = gf2.orthonormal_complete(STEANE_G, np.zeros((0, 7), dtype=np.uint8))
        assert out.shape == (0, 7)

    def test_steane_completion(self):
        isf = gf2.orthonormal_complete(STEANE_G, STEANE_H)
        assert np.array_equal(gf2.matmul(isf, STEANE_H.T), np.eye(3, dtype=np.uint8))
        assert not np.any(gf2.matmul(isf, STEANE_G.T))
        assert not np.any(gf2.matmul(isf, isf.T))

    def test_steane_square_identity(self):
        isf = gf2.orthonormal_complete(STEANE_G, STEANE_H)
        left = np.concatenate([STEANE_G, STEANE_H, isf], axis=0)
        right = np.concatenate([STEANE_G.T, isf.T, STEANE_H.T], axis=1)
        assert np.array_equal(gf2.matmul(left, right), np.eye(7, dtype=np.uint8))

    def test_published_isf_satisfies_pairing_identities(self):
        # The published choice is a valid pseudo-inverse (H @ ISF.T = I,
        # G @ ISF.T = 0) but is not self-orthogonal, so its composite square
        # product is unit-lower-triangular rather than the full identity.
        assert np.array_equal(gf2.matmul(STEANE_H, STEANE_ISF.T), np.eye(3, dtype=np.uint8))
        assert not np.any(gf2.matmul(STEANE_G, STEANE_ISF.T))
        left = np.concatenate([STEANE_G, STEANE_H, STEANE_ISF], axis=0)
        right = np.concatenate([STEANE_G.T, STEANE_ISF.T, STEANE_H.T], axis=1)
        prod = gf2.matmul(left, right)
        assert np.array_equal(np.triu(prod), np.eye(7, dtype=np.uint8))

    def test_infeasible_raises(self):
        # A dual row that is not self-orthogonal cannot be completed.
        duals = np.array([[1, 0, 0]], dtype=np.uint8)
        with pytest.raises(ValueError):
            gf2.orthonormal_complete(np.zeros((0, 3), dtype=np.uint8), duals)
