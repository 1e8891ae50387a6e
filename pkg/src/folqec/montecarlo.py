"""Fixed-weight error sampling and binomial word/bit error-rate curves.

Failure probabilities are estimated per error weight j (exhaustively when
the orbit is small, otherwise by uniform sampling with counter-based
per-trial streams) and recombined over a physical-error-probability grid
through the binomial distribution, with Wilson uncertainties propagated
into ±1 sigma bands and the truncation tail reported as a floor.
"""

from __future__ import annotations

import csv
import itertools
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np
from scipy.stats import binom

from . import gf2
from .bicycle import BpConfig, TannerGraph, bp_decode, build_foliated_tanner
from .codes import CssCode, FoliatedCode, extract_syndrome, foliate, is_logical_failure
from .foliated import DecodeConfig, decode_foliated
from .turbo import (
    TurboCode,
    TurboDecodeConfig,
    turbo_decode,
    turbo_is_failure,
    turbo_syndrome,
)

EXHAUSTIVE_CAP = 100_000
TAIL_FRACTION = 1e-3


def sample_fixed_weight(n_qubits: int, j: int, rng: np.random.Generator) -> np.ndarray:
    """Uniformly random binary pattern with support of size exactly j.

    Args:
        n_qubits: Pattern length.
        j: Support size, 0 <= j <= n_qubits.
        rng: Source of randomness.

    Raises:
        ValueError: If j is out of range.
    """
    if not 0 <= j <= n_qubits:
        raise ValueError("weight out of range")
    e = np.zeros(n_qubits, dtype=np.uint8)
    if j:
        e[rng.choice(n_qubits, size=j, replace=False)] = 1
    return e


def trial_rng(seed: int, j: int, trial: int) -> np.random.Generator:
    """Counter-based stream keyed by (run seed, weight, trial index)."""
    return np.random.Generator(
        np.random.Philox(key=[seed, ((j + 1) << 32) + trial])
    )


@dataclass
class FoliatedTarget:
    """Sampling target for a plain foliated sheet code.

    Error locations are all cluster qubits on a single sheet and the
    measured qubits otherwise (the port qubits belong to the neighbouring
    blocks).
    """

    fc: FoliatedCode
    config: DecodeConfig
    name: str

    def __post_init__(self):
        if self.fc.sheets == 1:
            self.location_idx = np.arange(self.fc.n_qubits)
        else:
            self.location_idx = np.nonzero(self.fc.measured)[0]

    @property
    def L(self) -> int:
        return self.fc.sheets

    @property
    def k(self) -> int:
        return self.fc.k

    @property
    def n_sites(self) -> int:
        return self.location_idx.shape[0]

    def expand(self, e_sites: np.ndarray) -> np.ndarray:
        e = np.zeros(self.fc.n_qubits, dtype=np.uint8)
        e[self.location_idx] = e_sites
        return e

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return extract_syndrome(self.fc, e)

    def decode(self, s: np.ndarray, p: float) -> np.ndarray:
        corr, _ = decode_foliated(self.fc, s, p, self.config)
        return corr

    def failure(self, residual: np.ndarray) -> tuple[bool, int]:
        return is_logical_failure(self.fc, residual)


@dataclass
class TurboTarget:
    """Sampling target over turbo error locations.

    Transient outer positions seen by no terminated outer check are
    undetectable by construction and excluded from the injectable set.
    """

    tc: TurboCode
    config: TurboDecodeConfig
    name: str

    def __post_init__(self):
        from .delay import expand as delay_expand

        covered = delay_expand(
            self.tc.spec.outer.parity, self.tc.tau_out, "terminated"
        ).any(axis=0)
        perm = np.asarray(self.tc.interleaver.permutation)
        keep = np.ones(self.tc.n_locations, dtype=bool)
        for m in range(self.tc.sheets):
            sl = self.tc.transient_slice(m)
            for i in range(self.tc.n_positions):
                if not covered[perm[i]]:
                    keep[sl.start + i] = False
        if self.tc.sheets > 1:
            fc = self.tc.fc
            cluster = np.zeros(self.tc.n_locations, dtype=bool)
            cluster[: fc.n_qubits] = True
            keep[: fc.n_qubits] &= fc.measured
        self.location_idx = np.nonzero(keep)[0]

    @property
    def L(self) -> int:
        return self.tc.sheets

    @property
    def k(self) -> int:
        return self.tc.k

    @property
    def n_sites(self) -> int:
        return self.location_idx.shape[0]

    def expand(self, e_sites: np.ndarray) -> np.ndarray:
        e = np.zeros(self.tc.n_locations, dtype=np.uint8)
        e[self.location_idx] = e_sites
        return e

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return turbo_syndrome(self.tc, e)

    def decode(self, s: np.ndarray, p: float) -> np.ndarray:
        corr, _ = turbo_decode(self.tc, s, p, self.config)
        return corr

    def failure(self, residual: np.ndarray) -> tuple[bool, int]:
        return turbo_is_failure(self.tc, residual)


@dataclass
class BicycleTarget:
    """Sampling target decoding the two foliated Tanner graphs by BP."""

    fc: FoliatedCode
    primal: TannerGraph
    dual: TannerGraph
    config: BpConfig
    name: str

    def __post_init__(self):
        if self.fc.sheets == 1:
            self.location_idx = np.arange(self.fc.n_qubits)
        else:
            self.location_idx = np.nonzero(self.fc.measured)[0]

    @property
    def L(self) -> int:
        return self.fc.sheets

    @property
    def k(self) -> int:
        return self.fc.k

    @property
    def n_sites(self) -> int:
        return self.location_idx.shape[0]

    def expand(self, e_sites: np.ndarray) -> np.ndarray:
        e = np.zeros(self.fc.n_qubits, dtype=np.uint8)
        e[self.location_idx] = e_sites
        return e

    def syndrome(self, e: np.ndarray) -> np.ndarray:
        return extract_syndrome(self.fc, e)

    def decode(self, s: np.ndarray, p: float) -> np.ndarray:
        corr = np.zeros(self.fc.n_qubits, dtype=np.uint8)
        for g in (self.primal, self.dual):
            if g.n_factors == 0:
                continue
            res = bp_decode(g, s[g.factor_rows], p, self.config)
            corr[g.var_ids] ^= res.correction
        return corr

    def failure(self, residual: np.ndarray) -> tuple[bool, int]:
        return is_logical_failure(self.fc, residual)


def bicycle_target(
    code: CssCode, L: int, config: BpConfig | None = None, name: str = "bicycle"
) -> BicycleTarget:
    """Builds a BP-decoded target for a bicycle-style CSS code."""
    primal, dual, fc = build_foliated_tanner(code, L)
    return BicycleTarget(
        fc=fc, primal=primal, dual=dual,
        config=config or BpConfig(), name=name,
    )


@dataclass(frozen=True)
class TrialBatch:
    """Aggregated fixed-weight trial outcomes.

    Attributes:
        code: Target name.
        L: Sheet count.
        k: Logical qubit count.
        j: Error weight.
        n_trials: Trials run (the orbit size when exhaustive).
        word_fail: Trials with at least one flipped logical readout.
        bit_fail: Total flipped logical readouts over all trials.
        seed: Run seed (0 for exhaustive batches).
        exhaustive: Whether every weight-j pattern was enumerated.
        decoder_errors: Trials whose correction missed the syndrome,
            conservatively counted as full failures.
    """

    code: str
    L: int
    k: int
    j: int
    n_trials: int
    word_fail: int
    bit_fail: int
    seed: int
    exhaustive: bool
    decoder_errors: int = 0

    def __post_init__(self):
        if not 0 <= self.word_fail <= self.n_trials:
            raise ValueError("word failures out of range")
        if not 0 <= self.bit_fail <= self.k * self.n_trials:
            raise ValueError("bit failures out of range")

    @property
    def p_word(self) -> float:
        return self.word_fail / self.n_trials if self.n_trials else 0.0

    @property
    def p_bit(self) -> float:
        return (
            self.bit_fail / (self.k * self.n_trials) if self.n_trials else 0.0
        )


def wilson_sigma(fails: int, n: int) -> float:
    """Half-width of the z=1 Wilson interval for a binomial proportion."""
    if n == 0:
        return 0.0
    return math.sqrt(fails * (n - fails) / n + 0.25) / (n + 1.0)


def _run_trials(target, j: int, p: float, seed: int, trials) -> tuple[int, int, int]:
    """Word/bit/decoder-error counts over explicit trial indices."""
    word = bit = derr = 0
    for t in trials:
        e_sites = sample_fixed_weight(target.n_sites, j, trial_rng(seed, j, t))
        word_i, bit_i, derr_i = _one_trial(target, e_sites, p)
        word, bit, derr = word + word_i, bit + bit_i, derr + derr_i
    return word, bit, derr


def _one_trial(target, e_sites: np.ndarray, p: float) -> tuple[int, int, int]:
    e = target.expand(e_sites)
    s = target.syndrome(e)
    try:
        corr = target.decode(s, p)
    except Exception:
        return 1, target.k, 1
    residual = e ^ corr
    if np.any(target.syndrome(residual)):
        return 1, target.k, 1
    word, bits = target.failure(residual)
    return int(word), int(bits), 0


def run_batch(
    target,
    j: int,
    n_trials: int,
    p: float,
    seed: int = 0,
    workers: int = 1,
    exhaustive_cap: int | None = None,
) -> TrialBatch:
    """Estimates the weight-j failure probabilities of a target.

    Enumerates every weight-j pattern when the orbit has at most
    exhaustive_cap members (EXHAUSTIVE_CAP by default), otherwise samples
    n_trials patterns with a counter-based stream per trial, so the
    aggregate is independent of worker count and trial order.

    Args:
        target: Sampling target (foliated, turbo or bicycle).
        j: Error weight.
        n_trials: Sampled trials when not exhaustive.
        p: Channel probability handed to the decoder as prior.
        seed: Run seed for the sampled branch.
        workers: Process count for sampled trials.
        exhaustive_cap: Largest orbit enumerated exactly; lower it for
            slow decoders where full enumeration is impractical.
    """
    n = target.n_sites
    if not 0 <= j <= n:
        raise ValueError("weight out of range")
    cap = EXHAUSTIVE_CAP if exhaustive_cap is None else exhaustive_cap
    exhaustive = math.comb(n, j) <= cap
    if exhaustive:
        word = bit = derr = 0
        count = 0
        for support in itertools.combinations(range(n), j):
            e_sites = np.zeros(n, dtype=np.uint8)
            e_sites[list(support)] = 1
            w, b, d = _one_trial(target, e_sites, p)
            word, bit, derr = word + w, bit + b, derr + d
            count += 1
        return TrialBatch(
            code=target.name, L=target.L, k=target.k, j=j,
            n_trials=count, word_fail=word, bit_fail=bit,
            seed=0, exhaustive=True, decoder_errors=derr,
        )
    trial_ids = range(n_trials)
    if workers > 1:
        chunks = [list(trial_ids)[i::workers] for i in range(workers)]
        with ProcessPoolExecutor(max_workers=workers) as pool:
            parts = list(
                pool.map(
                    _run_trials,
                    [target] * workers,
                    [j] * workers,
                    [p] * workers,
                    [seed] * workers,
                    chunks,
                )
            )
        word = sum(p_[0] for p_ in parts)
        bit = sum(p_[1] for p_ in parts)
        derr = sum(p_[2] for p_ in parts)
    else:
        word, bit, derr = _run_trials(target, j, p, seed, trial_ids)
    return TrialBatch(
        code=target.name, L=target.L, k=target.k, j=j,
        n_trials=n_trials, word_fail=word, bit_fail=bit,
        seed=seed, exhaustive=False, decoder_errors=derr,
    )


@dataclass
class SweepResult:
    """Binomially combined error-rate curves with uncertainty bands.

    Attributes:
        code, L, k: Target metadata.
        n_sites: Number of injectable error locations.
        seed: Run seed.
        p_grid: Physical error probabilities.
        wer, ber: Word/bit error-rate curves over p_grid.
        wer_sigma, ber_sigma: ±1 sigma bands (Wilson per weight,
            linearized through the binomial mixture, plus the truncation
            tail as a floor).
        batches: Per-weight raw batches, j = 0..j_max.
        warnings: Coverage notes (e.g. tail mass above tolerance).
    """

    code: str
    L: int
    k: int
    n_sites: int
    seed: int
    p_grid: np.ndarray
    wer: np.ndarray
    ber: np.ndarray
    wer_sigma: np.ndarray
    ber_sigma: np.ndarray
    batches: list
    warnings: list = field(default_factory=list)

    @property
    def j_max(self) -> int:
        return max(b.j for b in self.batches)


def binomial_combine(batches: list, p_grid, n_sites: int) -> SweepResult:
    """Mixes per-weight failure rates into WER(p)/BER(p) curves.

    WER(p) = sum_j P_word(j) * C(n, j) p^j (1-p)^(n-j) over the covered
    weights; the residual binomial mass beyond the largest covered weight
    is added to the sigma band and flagged when it exceeds a thousandth
    of the curve.

    Args:
        batches: TrialBatch list covering consecutive weights from 0.
        p_grid: Probabilities to evaluate.
        n_sites: Number of error locations of the sampled target.
    """
    if not batches:
        raise ValueError("no batches")
    batches = sorted(batches, key=lambda b: b.j)
    js = [b.j for b in batches]
    if js != list(range(len(js))):
        raise ValueError("batches must cover j = 0..j_max without gaps")
    p_grid = np.asarray(p_grid, dtype=float)
    j_arr = np.array(js)
    pw = np.array([b.p_word for b in batches])
    pb = np.array([b.p_bit for b in batches])
    sw = np.array([wilson_sigma(b.word_fail, b.n_trials) for b in batches])
    sb = np.array(
        [wilson_sigma(b.bit_fail, b.k * b.n_trials) for b in batches]
    )
    for b in batches:
        if b.exhaustive:
            sw[b.j] = 0.0
            sb[b.j] = 0.0
    wer = np.zeros_like(p_grid)
    ber = np.zeros_like(p_grid)
    wer_sigma = np.zeros_like(p_grid)
    ber_sigma = np.zeros_like(p_grid)
    warnings = []
    for i, p in enumerate(p_grid):
        pmf = binom.pmf(j_arr, n_sites, p)
        tail = float(binom.sf(js[-1], n_sites, p))
        wer[i] = min(float(pmf @ pw), 1.0)
        ber[i] = min(float(pmf @ pb), 1.0)
        wer_sigma[i] = math.sqrt(float((pmf**2) @ (sw**2))) + tail
        ber_sigma[i] = math.sqrt(float((pmf**2) @ (sb**2))) + tail
        if tail > TAIL_FRACTION * max(wer[i], 1e-12):
            warnings.append(
                f"tail mass {tail:.2e} beyond j={js[-1]} at p={p:g}"
            )
    first = batches[0]
    return SweepResult(
        code=first.code, L=first.L, k=first.k, n_sites=n_sites,
        seed=max(b.seed for b in batches), p_grid=p_grid,
        wer=wer, ber=ber, wer_sigma=wer_sigma, ber_sigma=ber_sigma,
        batches=batches, warnings=warnings,
    )


def run_sweep(
    target,
    p_grid,
    n_trials: int = 2000,
    seed: int = 0,
    max_j: int | None = None,
    workers: int = 1,
    exhaustive_cap: int | None = None,
) -> SweepResult:
    """Runs fixed-weight batches until the binomial tail is negligible.

    Weights are added one at a time; the sweep stops once the residual
    binomial mass at the largest requested probability drops below a
    thousandth of the accumulated curve (or max_j is hit, recorded as a
    warning).

    Args:
        target: Sampling target.
        p_grid: Physical error probabilities for the combined curves.
        n_trials: Trials per sampled (non-exhaustive) weight.
        seed: Run seed.
        max_j: Optional hard cap on the largest weight.
        workers: Process count for sampled batches.
        exhaustive_cap: Largest orbit enumerated exactly per weight.
    """
    p_grid = np.asarray(p_grid, dtype=float)
    p_max = float(p_grid.max())
    cap = target.n_sites if max_j is None else min(max_j, target.n_sites)
    batches = []
    wer_acc = 0.0
    for j in range(cap + 1):
        batches.append(
            run_batch(
                target, j, n_trials, p_max, seed=seed, workers=workers,
                exhaustive_cap=exhaustive_cap,
            )
        )
        pmf = float(binom.pmf(j, target.n_sites, p_max))
        wer_acc += pmf * batches[-1].p_word
        tail = float(binom.sf(j, target.n_sites, p_max))
        if tail < TAIL_FRACTION * max(wer_acc, 1e-12) or tail < 1e-12:
            break
    return binomial_combine(batches, p_grid, target.n_sites)


@dataclass(frozen=True)
class DirectResult:
    """Bernoulli-channel estimate used to cross-check combined curves."""

    p: float
    n_trials: int
    wer: float
    wer_sigma: float
    ber: float
    ber_sigma: float


def run_direct(
    target, p: float, n_trials: int, seed: int = 0, workers: int = 1
) -> DirectResult:
    """Direct i.i.d.-channel estimate at a single probability.

    Each trial draws its weight from Binomial(n_sites, p) and a uniform
    support of that weight, reusing the per-trial streams, so it matches
    the binomial combination in distribution.
    """
    word = bit = 0
    for t in range(n_trials):
        # Weight key outside the fixed-weight range keeps the streams
        # disjoint from run_batch's.
        rng = trial_rng(seed, target.n_sites + 1, t)
        j = int(rng.binomial(target.n_sites, p))
        e_sites = sample_fixed_weight(target.n_sites, j, rng)
        w, b, _ = _one_trial(target, e_sites, p)
        word += w
        bit += b
    return DirectResult(
        p=p, n_trials=n_trials,
        wer=word / n_trials, wer_sigma=wilson_sigma(word, n_trials),
        ber=bit / (target.k * n_trials),
        ber_sigma=wilson_sigma(bit, target.k * n_trials),
    )


SWEEP_HEADER = (
    "code,L,k,p,wer,wer_sigma,ber,ber_sigma,n_qubits,j_max,seed"
)
BATCH_HEADER = "code,L,k,j,n_trials,word_fail,bit_fail"


def write_sweep_csv(results: list, path) -> None:
    """Writes one row per (code, L, k, p) of the combined curves."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(SWEEP_HEADER.split(","))
        for r in results:
            for i, p in enumerate(r.p_grid):
                writer.writerow(
                    [
                        r.code, r.L, r.k, f"{p:.10g}",
                        f"{r.wer[i]:.10g}", f"{r.wer_sigma[i]:.10g}",
                        f"{r.ber[i]:.10g}", f"{r.ber_sigma[i]:.10g}",
                        r.n_sites, r.j_max, r.seed,
                    ]
                )


def write_batches_csv(results: list, path) -> None:
    """Writes the per-weight raw counts behind each sweep."""
    with open(path, "w", newline="") as fh:
        writer = csv.writer(fh)
        writer.writerow(BATCH_HEADER.split(","))
        for r in results:
            for b in r.batches:
                writer.writerow(
                    [b.code, b.L, b.k, b.j, b.n_trials, b.word_fail, b.bit_fail]
                )
