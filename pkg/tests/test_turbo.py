"""Tests for turbo code construction and iterative decoding."""

from __future__ import annotations

import numpy as np
import pytest

from folqec import gf2
from folqec.delay import DelayMatrix, DelayPoly, expand
from folqec.library import c3_seed, t9_spec, t25_spec
from folqec.turbo import (
    Interleaver,
    TurboDecodeConfig,
    build_turbo,
    make_interleaver,
    transpose_interleave,
    turbo_decode,
    turbo_is_failure,
    turbo_syndrome,
)


class TestInterleavers:
    def test_transpose_golden(self):
        seq = np.array(["a1", "a2", "a3", "b1", "b2", "b3", "c1", "c2", "c3"])
        out = transpose_interleave(seq, 3)
        assert out.tolist() == ["a1", "b1", "c1", "a2", "b2", "c2", "a3", "b3", "c3"]

    def test_transpose_single_frame_is_identity(self):
        seq = np.arange(4)
        assert transpose_interleave(seq, 4).tolist() == seq.tolist()

    def test_transpose_bad_length(self):
        with pytest.raises(ValueError):
            transpose_interleave(np.arange(7), 3)

    def test_roundtrip(self):
        rng = np.random.default_rng(3)
        for kind in ("identity", "transpose", "random"):
            pi = make_interleaver(kind, 12, width=3, rng_seed=5)
            x = rng.integers(0, 2, 12).astype(np.uint8)
            assert np.array_equal(pi.unapply(pi.apply(x)), x)
            assert np.array_equal(pi.apply(pi.unapply(x)), x)

    def test_not_a_bijection(self):
        with pytest.raises(ValueError):
            Interleaver(kind="custom", permutation=(0, 0, 1))

    def test_unknown_kind(self):
        with pytest.raises(ValueError):
            make_interleaver("butterfly", 6)


class TestBuildTurbo:
    def test_rate_bookkeeping(self):
        # Every extra logical qubit costs 16 error locations per sheet:
        # 9 inner code qubits, 3 inner ancillas, 1 outer ancilla and 3
        # transient outer positions (boundary frames deviate by a
        # constant, which drops out of the increment).
        for spec, L in ((t9_spec(), 1), (t9_spec(), 2), (t25_spec(), 2)):
            a = build_turbo(spec, tau_out=6, L=L)
            b = build_turbo(spec, tau_out=7, L=L)
            assert b.k - a.k == 1
            assert (b.n_locations - a.n_locations) == 16 * L

    def test_distances(self):
        assert t9_spec().distance == 9
        assert t25_spec().distance == 25

    def test_identity_interleaver_matches_polynomial_composition(self):
        # Oracle: compose the two generator polynomials directly (outer
        # frame position c at delay q becomes an inner-frame shift 3q+c)
        # and expand; the aligned shifts must reproduce the constructed
        # logical rows exactly.
        tc = build_turbo(t9_spec("identity"), tau_out=4, L=1)
        g_in = c3_seed().generator.entries[0]
        g_out = c3_seed().generator.entries[0]
        comp = [DelayPoly.zero()] * 3
        for c, poly in enumerate(g_out):
            for q in poly.exponents:
                comp = [a + b.shift(3 * q + c) for a, b in zip(comp, g_in)]
        rows = expand(DelayMatrix([comp]), tc.tau_in, "terminated")
        enc = tc.fc.base.logical_x
        for r in range(enc.shape[0]):
            assert np.array_equal(rows[3 * r], enc[r])
        # The encoded logicals span a subspace of the full composed family.
        assert gf2.rank(np.vstack([rows, enc])) == gf2.rank(rows)

    def test_composite_code_validates(self):
        tc = build_turbo(t9_spec(rng_seed=2), tau_out=5, L=2)
        tc.fc.base.validate()
        assert np.array_equal(tc.fc.base.sx, tc.fc.base.sz)

    def test_transient_images_commute_with_inner_checks(self):
        tc = build_turbo(t9_spec(rng_seed=2), tau_out=5, L=1)
        inner_rows = tc.fc.base.sx[: tc.n_inner_checks]
        assert not np.any(gf2.matmul(inner_rows, tc.encode_rows.T))


def covered_positions(spec, tau_out):
    """Outer stream positions covered by at least one terminated check."""
    return expand(spec.outer.parity, tau_out, "terminated").any(axis=0)


def single_error_syndromes(tc):
    """Syndrome of every weight-1 error-location pattern."""
    out = []
    for q in range(tc.n_locations):
        e = np.zeros(tc.n_locations, dtype=np.uint8)
        e[q] = 1
        out.append(turbo_syndrome(tc, e))
    return np.array(out)


def unique_singles(tc):
    """Locations whose single-error syndrome is nonzero and unshared."""
    synd = single_error_syndromes(tc)
    keys = [s.tobytes() for s in synd]
    from collections import Counter

    counts = Counter(keys)
    zero = np.zeros(tc.fc.parity_checks.shape[0], dtype=np.uint8).tobytes()
    return [
        q for q, k in enumerate(keys) if k != zero and counts[k] == 1
    ]


class TestTurboDecode:
    def test_zero_syndrome(self):
        tc = build_turbo(t9_spec(rng_seed=7), tau_out=4, L=1)
        s = np.zeros(tc.fc.parity_checks.shape[0], dtype=np.uint8)
        corr, diag = turbo_decode(tc, s, 0.01)
        assert not np.any(corr)
        assert diag.rounds == 0

    def test_t9_single_errors_against_weight_one_oracle(self):
        # Exhaustive weight-<=1 oracle: a single error whose syndrome is
        # shared by no other weight-1 pattern must be corrected exactly;
        # degenerate singles must still receive a minimum-weight,
        # syndrome-reproducing correction.
        for L, tau_out in ((1, 6), (3, 4)):
            tc = build_turbo(t9_spec(rng_seed=7), tau_out=tau_out, L=L)
            cfg = TurboDecodeConfig(rounds=3, exchange_iters=2)
            unique = set(unique_singles(tc))
            for q in range(tc.n_locations):
                e = np.zeros(tc.n_locations, dtype=np.uint8)
                e[q] = 1
                s = turbo_syndrome(tc, e)
                corr, _ = turbo_decode(tc, s, 0.01, cfg)
                assert np.array_equal(turbo_syndrome(tc, corr), s)
                if q in unique:
                    assert np.array_equal(corr, e), f"wrong correction at {q}"

    def test_t9_degenerate_single_is_a_true_tie(self):
        # An inner code position seen by exactly one inner check shares
        # its syndrome with that check's ancilla flip, and when the outer
        # code does not observe its class either, the two explanations
        # are indistinguishable: their difference is a zero-syndrome
        # pattern that flips the readout.  This bounds single-error
        # guarantees for shallow sheet stacks.
        tc = build_turbo(t9_spec(rng_seed=7), tau_out=6, L=1)
        unique = set(unique_singles(tc))
        degenerate = [q for q in range(tc.fc.base.n) if q not in unique]
        assert degenerate, "expected at least one degenerate single"
        synd = single_error_syndromes(tc)
        found = False
        for q in degenerate:
            for r in range(tc.n_locations):
                if r == q or not np.array_equal(synd[r], synd[q]):
                    continue
                e = np.zeros(tc.n_locations, dtype=np.uint8)
                e[q] = e[r] = 1
                assert not np.any(turbo_syndrome(tc, e))
                if turbo_is_failure(tc, e)[0]:
                    found = True
        assert found, "expected a readout-flipping weight-2 tie"

    def test_unobserved_transient_position_is_unprotected(self):
        # An error on a transient outer position seen by no terminated
        # outer check has zero syndrome yet flips the logical readout;
        # these boundary positions bound the injectable set, like the
        # port qubits of plain foliated codes.
        spec = t9_spec(rng_seed=7)
        tc = build_turbo(spec, tau_out=6, L=1)
        covered = covered_positions(spec, 6)
        perm = np.asarray(tc.interleaver.permutation)
        i = next(i for i in range(tc.n_positions) if not covered[perm[i]])
        e = np.zeros(tc.n_locations, dtype=np.uint8)
        e[tc.transient_slice(0).start + i] = 1
        assert not np.any(turbo_syndrome(tc, e))
        word_fail, _ = turbo_is_failure(tc, e)
        assert word_fail

    def test_syndrome_always_satisfied(self):
        rng = np.random.default_rng(17)
        cfg = TurboDecodeConfig(rounds=2, exchange_iters=1)
        for L in (1, 2):
            tc = build_turbo(t9_spec(rng_seed=1), tau_out=4, L=L)
            for _ in range(4):
                e = (rng.random(tc.n_locations) < 0.05).astype(np.uint8)
                s = turbo_syndrome(tc, e)
                corr, _ = turbo_decode(tc, s, 0.05, cfg)
                assert np.array_equal(turbo_syndrome(tc, corr), s)

    def test_pipeline_baseline(self):
        # rounds=0 runs one inner stage and one outer stage with no
        # feedback; on a clean single error it agrees with the full loop.
        tc = build_turbo(t9_spec(rng_seed=7), tau_out=6, L=1)
        e = np.zeros(tc.n_locations, dtype=np.uint8)
        e[10] = 1
        s = turbo_syndrome(tc, e)
        corr0, diag0 = turbo_decode(tc, s, 0.01, TurboDecodeConfig(rounds=0))
        corr5, _ = turbo_decode(tc, s, 0.01, TurboDecodeConfig(rounds=5))
        assert diag0.rounds == 1
        assert np.array_equal(turbo_syndrome(tc, corr0), s)
        assert np.array_equal(corr0, corr5)

    def test_t25_weight_four_well_separated(self):
        # Four code errors at least eight inner frames apart on the
        # distance-25 code; the correction must match exactly.
        tc = build_turbo(t25_spec(rng_seed=5), tau_out=12, L=1)
        cfg = TurboDecodeConfig(rounds=2, exchange_iters=1)
        rng = np.random.default_rng(0)
        for _ in range(3):
            qs = [3 * f + int(rng.integers(0, 3)) for f in (3, 12, 21, 30)]
            e = np.zeros(tc.n_locations, dtype=np.uint8)
            for q in qs:
                e[q] = 1
            s = turbo_syndrome(tc, e)
            corr, _ = turbo_decode(tc, s, 0.01, cfg)
            assert np.array_equal(corr, e)

    def test_bad_lengths(self):
        tc = build_turbo(t9_spec(), tau_out=4, L=1)
        with pytest.raises(ValueError):
            turbo_decode(tc, np.zeros(3, dtype=np.uint8), 0.01)
        s = np.zeros(tc.fc.parity_checks.shape[0], dtype=np.uint8)
        with pytest.raises(ValueError):
            turbo_decode(tc, s, np.zeros(5))
