"""Tests for fixed-weight sampling and binomial error-rate curves."""

from __future__ import annotations

import math

import numpy as np
import pytest

import folqec.montecarlo as mc
from folqec.bicycle import build_bicycle, random_seed_row
from folqec.codes import convolutional_code, foliate
from folqec.foliated import DecodeConfig
from folqec.library import CONV_SEEDS, t9_spec
from folqec.montecarlo import (
    FoliatedTarget,
    TrialBatch,
    TurboTarget,
    bicycle_target,
    binomial_combine,
    run_batch,
    run_direct,
    run_sweep,
    sample_fixed_weight,
    trial_rng,
    wilson_sigma,
    write_batches_csv,
    write_sweep_csv,
)
from folqec.turbo import TurboDecodeConfig, build_turbo


def c3_target(L, tau=8):
    seed = CONV_SEEDS["C3"]()
    fc = foliate(convolutional_code(seed, tau), L)
    return FoliatedTarget(fc=fc, config=DecodeConfig(seed=seed), name="C3")


class TestSampling:
    def test_weight_extremes(self):
        rng = np.random.default_rng(0)
        assert not sample_fixed_weight(7, 0, rng).any()
        assert sample_fixed_weight(7, 7, rng).all()
        with pytest.raises(ValueError):
            sample_fixed_weight(7, 8, rng)
        with pytest.raises(ValueError):
            sample_fixed_weight(7, -1, rng)

    def test_exact_weight(self):
        rng = np.random.default_rng(1)
        for j in range(11):
            assert sample_fixed_weight(10, j, rng).sum() == j

    def test_uniform_frequency(self):
        # Each site is hit with probability j/n; a fixed-seed run of 1e5
        # draws must keep every count within three binomial sigmas.
        n, j, draws = 10, 3, 100_000
        rng = np.random.default_rng(7)
        counts = np.zeros(n)
        for _ in range(draws):
            counts += sample_fixed_weight(n, j, rng)
        q = j / n
        sigma = math.sqrt(draws * q * (1 - q))
        assert np.all(np.abs(counts - draws * q) < 3 * sigma)

    def test_trial_streams_are_reproducible(self):
        a = trial_rng(3, 2, 17).integers(0, 1 << 30, 4)
        b = trial_rng(3, 2, 17).integers(0, 1 << 30, 4)
        c = trial_rng(3, 2, 18).integers(0, 1 << 30, 4)
        assert np.array_equal(a, b)
        assert not np.array_equal(a, c)


class TestRunBatch:
    def test_weight_zero_never_fails(self):
        b = run_batch(c3_target(1), 0, 10, 0.01)
        assert b.exhaustive and b.n_trials == 1
        assert b.word_fail == 0 and b.bit_fail == 0

    def test_single_sheet_single_errors_can_fail(self):
        # On one sheet an ancilla flip and a once-checked code qubit share
        # a syndrome while their difference flips the readout, so some
        # single errors are miscorrected no matter the decoder.
        b = run_batch(c3_target(1), 1, 10, 0.01)
        assert b.exhaustive
        assert b.word_fail > 0
        assert b.word_fail <= b.bit_fail <= b.k * b.word_fail

    def test_adjacent_double_errors_fail(self):
        b = run_batch(c3_target(1), 2, 10, 0.01)
        assert b.exhaustive and b.word_fail > 0

    def test_exhaustive_is_seed_invariant(self):
        a = run_batch(c3_target(1), 1, 10, 0.01, seed=1)
        b = run_batch(c3_target(1), 1, 10, 0.01, seed=99)
        assert (a.word_fail, a.bit_fail, a.n_trials) == (
            b.word_fail, b.bit_fail, b.n_trials,
        )

    def test_sampled_branch_and_worker_invariance(self, monkeypatch):
        monkeypatch.setattr(mc, "EXHAUSTIVE_CAP", 1)
        tg = c3_target(2)
        one = run_batch(tg, 2, 30, 0.02, seed=5, workers=1)
        two = run_batch(tg, 2, 30, 0.02, seed=5, workers=3)
        assert not one.exhaustive
        assert (one.word_fail, one.bit_fail) == (two.word_fail, two.bit_fail)

    def test_batch_invariants(self):
        with pytest.raises(ValueError):
            TrialBatch(
                code="x", L=1, k=2, j=1, n_trials=5, word_fail=6,
                bit_fail=0, seed=0, exhaustive=True,
            )
        with pytest.raises(ValueError):
            TrialBatch(
                code="x", L=1, k=2, j=1, n_trials=5, word_fail=5,
                bit_fail=11, seed=0, exhaustive=True,
            )

    def test_weight_out_of_range(self):
        tg = c3_target(1)
        with pytest.raises(ValueError):
            run_batch(tg, tg.n_sites + 1, 10, 0.01)


def _fake_batches(n, p_word, k=2):
    out = []
    for j in range(n + 1):
        trials = 50
        fails = round(trials * p_word(j))
        out.append(
            TrialBatch(
                code="toy", L=1, k=k, j=j, n_trials=trials,
                word_fail=fails, bit_fail=fails, seed=0, exhaustive=True,
            )
        )
    return out


class TestBinomialCombine:
    def test_all_weights_fail_closed_form(self):
        n = 9
        batches = _fake_batches(n, lambda j: 0.0 if j == 0 else 1.0)
        grid = np.array([0.01, 0.05, 0.2])
        res = binomial_combine(batches, grid, n)
        assert np.allclose(res.wer, 1 - (1 - grid) ** n, atol=1e-12)

    def test_never_fails_is_zero(self):
        res = binomial_combine(
            _fake_batches(6, lambda j: 0.0), [0.01, 0.1], 6
        )
        assert not res.wer.any() and not res.ber.any()
        assert not res.warnings

    def test_truncation_tail_reported(self):
        # Covering only j <= 1 of a large instance at a sizeable p leaves
        # binomial mass on the table: flagged and added to the band.
        res = binomial_combine(_fake_batches(1, lambda j: 0.0), [0.2], 50)
        assert res.warnings
        assert res.wer_sigma[0] > 0.9

    def test_gap_in_weights_rejected(self):
        batches = _fake_batches(3, lambda j: 0.0)
        del batches[1]
        with pytest.raises(ValueError):
            binomial_combine(batches, [0.01], 3)

    def test_wilson_sigma_sane(self):
        assert wilson_sigma(0, 0) == 0.0
        assert 0.04 < wilson_sigma(50, 100) < 0.06
        assert wilson_sigma(0, 100) < 0.01


class TestSweepAndDirect:
    def test_sweep_is_adaptive_and_bounded(self):
        res = run_sweep(c3_target(1, tau=4), [0.005, 0.01], n_trials=50)
        assert res.j_max < res.n_sites
        assert np.all((res.wer >= 0) & (res.wer <= 1))
        assert np.all(np.diff(res.wer) >= 0)

    def test_direct_matches_combined_within_two_sigma(self):
        tg = c3_target(2)
        res = run_sweep(tg, [0.02], n_trials=300)
        d = run_direct(tg, 0.02, 800)
        assert abs(d.wer - res.wer[0]) < 2 * (d.wer_sigma + res.wer_sigma[0])

    def test_turbo_target_excludes_unobserved_transients(self):
        tc = build_turbo(t9_spec(rng_seed=7), tau_out=6, L=1)
        tg = TurboTarget(
            tc=tc, config=TurboDecodeConfig(rounds=2, exchange_iters=1),
            name="T9",
        )
        assert tg.n_sites < tc.n_locations
        b = run_batch(tg, 0, 5, 0.01)
        assert b.word_fail == 0

    def test_bicycle_target_decodes_weight_one(self):
        code = build_bicycle(16, random_seed_row(16, 3, 2), k=2).to_css()
        tg = bicycle_target(code, 1, name="bike")
        b = run_batch(tg, 1, 10, 0.01)
        assert b.exhaustive and b.n_trials == tg.n_sites
        # ancilla-vs-code ties exist on one sheet; most singles decode
        assert b.word_fail < b.n_trials / 2


class TestCsv:
    def test_schemas_and_determinism(self, tmp_path):
        res = binomial_combine(
            _fake_batches(3, lambda j: 0.1 * j), [0.01, 0.02], 8
        )
        sweep = tmp_path / "sweep.csv"
        raw = tmp_path / "batches.csv"
        write_sweep_csv([res], sweep)
        write_batches_csv([res], raw)
        lines = sweep.read_text().splitlines()
        assert lines[0] == "code,L,k,p,wer,wer_sigma,ber,ber_sigma,n_qubits,j_max,seed"
        assert len(lines) == 3
        assert raw.read_text().splitlines()[0] == (
            "code,L,k,j,n_trials,word_fail,bit_fail"
        )
        first = sweep.read_bytes()
        write_sweep_csv([res], sweep)
        assert sweep.read_bytes() == first
