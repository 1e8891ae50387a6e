"""Tests for delay-operator polynomial algebra and seed expansion."""

from __future__ import annotations

import itertools

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from folqec import gf2
from folqec.delay import (
    DelayMatrix,
    DelayPoly,
    SeedSet,
    block_correlation,
    correlate,
    derive_isf,
    expand,
    is_noncatastrophic,
    poly_mul,
    verify_orthogonality,
)

D = DelayPoly.d


def c3_seed() -> SeedSet:
    """Rate-1/3 self-dual convolutional code used throughout."""
    g = DelayMatrix.from_exponents([[[1], [1], [0]]])
    h = DelayMatrix.from_exponents([[[0, 1, 2], [0, 2], [0]]])
    isf = DelayMatrix.from_exponents([[[1], [1], []]])
    return SeedSet(generator=g, parity=h, isf=isf, rates=(1, 3, 1, 1), name="C3")


def conv_oracle(a_exps, b_exps):
    """Oracle: polynomial product by integer-coefficient convolution mod 2."""
    counts: dict[int, int] = {}
    for qa in a_exps:
        for qb in b_exps:
            counts[qa + qb] = counts.get(qa + qb, 0) + 1
    return frozenset(q for q, c in counts.items() if c % 2)


forward_poly = st.frozensets(st.integers(0, 5), max_size=4).map(DelayPoly)


class TestPolyMul:
    def test_delay_times_inverse(self):
        assert poly_mul(D(1), D(-1)) == DelayPoly.one()

    def test_one_is_identity(self):
        p = DelayPoly([0, 1, 3])
        assert poly_mul(DelayPoly.one(), p) == p

    def test_matches_convolution_oracle(self):
        a, b = DelayPoly([0, 1, 2]), DelayPoly([0, 2])
        prod = poly_mul(a, b)
        assert prod == DelayPoly([0, 1, 3, 4])
        assert prod.exponents == conv_oracle([0, 1, 2], [0, 2])

    def test_double_inverse_rejected(self):
        with pytest.raises(ValueError):
            poly_mul(DelayPoly([-1]), DelayPoly([-2]))

    @given(forward_poly, forward_poly, forward_poly)
    @settings(max_examples=60, deadline=None)
    def test_associative_commutative_forward(self, a, b, c):
        assert poly_mul(a, b) == poly_mul(b, a)
        assert poly_mul(poly_mul(a, b), c) == poly_mul(a, poly_mul(b, c))
        assert poly_mul(a, b).exponents == conv_oracle(a.exponents, b.exponents)


class TestCoefficientViews:
    def test_forward_and_dual_split(self):
        p = DelayPoly([-2, 0, 3])
        assert p.forward_coeffs == {0: 1, 3: 1}
        assert p.dual_coeffs == {2: 1}
        assert p.conj() == DelayPoly([2, 0, -3])


class TestExpand:
    def test_zero_seed(self):
        z = DelayMatrix.zeros(1, 3)
        assert not np.any(expand(z, 4, "open"))

    def test_c3_generator_layout(self):
        g = DelayMatrix.from_exponents([[[1], [1], [0]]])
        m = expand(g, 3, "open")
        assert m.shape == (3, 9)
        assert list(m[0]) == [0, 0, 1, 1, 1, 0, 0, 0, 0]
        assert list(m[1]) == [0, 0, 0, 0, 0, 1, 1, 1, 0]

    def test_parity_example_layout(self):
        h = DelayMatrix.from_exponents([[[0, 1, 2], [0, 2], [0]]])
        m = expand(h, 5, "open")
        # First row: 111 100 110 across three consecutive frames.
        assert list(m[0][:9]) == [1, 1, 1, 1, 0, 0, 1, 1, 0]

    def test_terminated_drops_overhanging_rows(self):
        h = DelayMatrix.from_exponents([[[0, 1, 2], [0, 2], [0]]])
        assert expand(h, 5, "terminated").shape == (3, 15)
        assert expand(h, 5, "open").shape == (5, 15)

    def test_c5_parity_row_weight(self):
        h = DelayMatrix.from_exponents(
            [[[0, 1, 2, 3, 4], [0, 2, 3, 5], [0, 2, 3, 4, 5]]]
        )
        m = expand(h, 8, "terminated")
        assert m.shape[0] == 3
        assert all(row.sum() == 14 for row in m)

    def test_tau_too_small(self):
        h = DelayMatrix.from_exponents([[[0, 1, 2], [0, 2], [0]]])
        with pytest.raises(ValueError):
            expand(h, 2)

    def test_product_expansion_interior(self):
        rng = np.random.default_rng(2)
        tau = 12
        for _ in range(10):
            a = DelayPoly(np.nonzero(rng.integers(0, 2, 3))[0])
            b = DelayPoly(np.nonzero(rng.integers(0, 2, 3))[0])
            ea = expand(DelayMatrix([[a]]), tau, "open")
            eb = expand(DelayMatrix([[b]]), tau, "open")
            eab = expand(DelayMatrix([[poly_mul(a, b)]]), tau, "open")
            prod = gf2.matmul(ea, eb)
            interior = slice(0, tau - a.degree - b.degree)
            assert np.array_equal(prod[interior], eab[interior])


class TestCorrelate:
    def test_matches_expanded_dot_oracle(self):
        rng = np.random.default_rng(9)
        tau = 14
        for _ in range(10):
            a = [DelayPoly(np.nonzero(rng.integers(0, 2, 3))[0]) for _ in range(3)]
            b = [DelayPoly(np.nonzero(rng.integers(0, 2, 3))[0]) for _ in range(3)]
            ea = expand(DelayMatrix([a]), tau, "open")
            eb = expand(DelayMatrix([b]), tau, "open")
            corr = correlate(a, b)
            # Row i of ea against row j of eb equals the coefficient at j-i.
            for i in range(4, 9):
                for j in range(4, 9):
                    dot = int(ea[i] @ eb[j]) % 2
                    assert dot == corr.get(j - i, 0)


class TestVerifyOrthogonality:
    def test_c3_passes(self):
        report = verify_orthogonality(c3_seed())
        assert report.passed, report.failing()

    def test_corrupted_isf_names_block(self):
        seed = c3_seed()
        bad = DelayMatrix.from_exponents([[[1], [0, 1], []]])
        seed2 = SeedSet(seed.generator, seed.parity, bad, seed.rates)
        report = verify_orthogonality(seed2)
        assert not report.passed
        assert any("ISF" in name for name in report.failing())


class TestDeriveIsf:
    def test_c3(self):
        seed = c3_seed()
        bare = SeedSet(seed.generator, seed.parity, None, seed.rates)
        isf = derive_isf(bare)
        out = SeedSet(seed.generator, seed.parity, isf, seed.rates)
        assert verify_orthogonality(out).passed

    def test_rate_23_worked_example(self):
        # Published classical completion [D, 1+D, 0] pairs with the parity
        # row as a delta once the 2-frame shift noted alongside it is
        # compensated.
        h = [DelayPoly([0, 1, 2]), DelayPoly([0, 2]), DelayPoly([0])]
        published = [DelayPoly([3]), DelayPoly([2, 3]), DelayPoly([])]
        assert correlate(published, h) == {0: 1}

    def test_random_seeds_satisfy_identities(self):
        rng = np.random.default_rng(17)
        seeds = random_valid_seeds(rng, count=10)
        for seed in seeds:
            isf = derive_isf(seed)
            full = SeedSet(seed.generator, seed.parity, isf, seed.rates)
            report = verify_orthogonality(full)
            assert report.passed, report.failing()


def random_valid_seeds(rng, count, max_degree=2):
    """Random rate-1/3 CSS seed pairs passing the orthogonality screen."""
    polys = [DelayPoly(np.nonzero(bits)[0]) for bits in itertools.product([0, 1], repeat=max_degree + 1)]
    gens = []
    for row in itertools.product(polys, repeat=3):
        if correlate(row, row) == {0: 1}:
            gm = DelayMatrix([list(row)])
            if is_noncatastrophic(gm):
                gens.append(list(row))
    out = []
    guard = 0
    while len(out) < count and guard < 200_000:
        guard += 1
        g = gens[rng.integers(len(gens))]
        h = [polys[rng.integers(len(polys))] for _ in range(3)]
        if all(p.is_zero() for p in h):
            continue
        if correlate(h, h) or correlate(h, g):
            continue
        seed = SeedSet(DelayMatrix([g]), DelayMatrix([h]), None, (1, 3, 1, 1))
        try:
            derive_isf(seed)
        except ValueError:
            continue
        out.append(seed)
    assert len(out) == count, "seed generation exhausted"
    return out


class TestNonCatastrophic:
    def test_c3_generator(self):
        assert is_noncatastrophic(DelayMatrix.from_exponents([[[1], [1], [0]]]))

    def test_catastrophic_example(self):
        # All entries share the factor 1+D: infinite-weight inverse.
        g = DelayMatrix.from_exponents([[[0, 1], [0, 1], []]])
        assert not is_noncatastrophic(g)
