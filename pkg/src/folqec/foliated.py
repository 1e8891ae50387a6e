"""Foliated decoding loop: per-sheet SISO decoding, ancilla marginal
exchange between next-nearest sheets, averaging fallback, and a final
per-sheet hard decode conditioned on hardened ancilla values.

Decoding sheet m holds the code qubits of sheet m plus virtual copies of
the ancillas on sheets m-1 and m+1; a physical ancilla therefore has two
marginal slots (from decoding sheets m-1 and m+1) which are exchanged
Jacobi-style until they agree.  The final correction always reproduces the
input syndrome: ancillas are hardened globally first, and each sheet then
solves its own checks with the ancilla contribution pinned.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .codes import FoliatedCode, extract_syndrome
from .delay import SeedSet, expand
from .siso import decode_sheet, sheet_pure_error
from .trellis import STATE_CAP, build_sheet_seed, build_trellis, min_weight_path

_MIN_P = 1e-12


@dataclass
class DecodeConfig:
    """Configuration for the foliated decoding loop.

    Attributes:
        seed: Base convolutional seed family of the foliated code.
        tol: Convergence threshold on the largest disagreement between the
            two marginal slots of any ancilla.
        max_iters: Iteration cap before the averaging fallback.
        state_cap: Trellis state-count guard.
    """

    seed: SeedSet
    tol: float = 1e-4
    max_iters: int = 30
    state_cap: int = STATE_CAP


@dataclass
class ExchangeState:
    """Marginal slots for every physical ancilla.

    `slot_lo[m]` holds the posteriors computed by decoding sheet m-1 and
    `slot_hi[m]` those from sheet m+1 for the ancillas of sheet m; entries
    are NaN where the corresponding decoding sheet does not exist.
    """

    slot_lo: np.ndarray
    slot_hi: np.ndarray
    iteration: int = 0
    history: list = field(default_factory=list)
    converged: bool = False


@dataclass
class Diagnostics:
    iterations: int
    converged: bool
    history: list
    fallback: bool


def average_and_harden(state: ExchangeState) -> np.ndarray:
    """Averages each ancilla's marginal slots and makes a hard choice.

    Returns:
        uint8 array shaped like the slots; 1 where the averaged marginal
        strictly exceeds 1/2 (ties resolve to no-error).
    """
    stacked = np.stack([state.slot_lo, state.slot_hi])
    with np.errstate(invalid="ignore"):
        avg = np.nanmean(stacked, axis=0)
    avg = np.nan_to_num(avg, nan=0.0)
    return (avg > 0.5).astype(np.uint8)


def _as_prior_array(priors, n_qubits: int) -> np.ndarray:
    arr = np.asarray(priors, dtype=float)
    if arr.ndim == 0:
        return np.full(n_qubits, float(arr))
    if arr.shape[0] != n_qubits:
        raise ValueError("prior length mismatch")
    return arr


def decode_foliated(
    fc: FoliatedCode, syndrome, priors, config: DecodeConfig
) -> tuple[np.ndarray, Diagnostics]:
    """Decodes a foliated convolutional code instance.

    Args:
        fc: Foliated code built from `config.seed` (self-dual base).
        syndrome: Parity-check outcomes, one bit per row of
            fc.parity_checks.
        priors: Per-qubit error probability (scalar or length
            fc.n_qubits).
        config: Loop configuration.

    Returns:
        (correction, diagnostics); extract_syndrome(fc, correction) always
        equals the input syndrome.
    """
    L = fc.sheets
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if syndrome.shape[0] != fc.parity_checks.shape[0]:
        raise ValueError("syndrome length mismatch")
    priors = _as_prior_array(priors, fc.n_qubits)
    if not np.any(syndrome):
        correction = np.zeros(fc.n_qubits, dtype=np.uint8)
        return correction, Diagnostics(
            iterations=1, converged=True, history=[], fallback=False
        )
    seed = config.seed
    n_x = seed.rates[2]
    tau = fc.base.n // seed.n
    copies = 1 if L == 1 else 2
    sheet = build_sheet_seed(seed, copies=copies)
    trellis = build_trellis(sheet, tau, state_cap=config.state_cap)
    n_slot = n_x * tau
    n_anc = fc.sheet_codes[0].n_ancilla

    sheet_syndromes = [syndrome[fc.check_rows(m)] for m in range(L)]
    code_priors = [priors[fc.code_slice(m)] for m in range(L)]

    def channel_slot(mm: int) -> np.ndarray:
        """Channel prior for the virtual copy of sheet mm's ancillas."""
        arr = np.zeros(n_slot)
        if 0 <= mm < L:
            arr[:n_anc] = priors[fc.ancilla_slice(mm)]
        return arr

    if L == 1:
        correction = np.zeros(fc.n_qubits, dtype=np.uint8)
        anc_w = _weights_from_priors(channel_slot(0))
        w = np.zeros((tau, seed.n + n_x))
        w[:, : seed.n] = _weights_from_priors(code_priors[0]).reshape(tau, seed.n)
        w[:, seed.n :] = anc_w.reshape(tau, n_x)
        e_sheet = _pinned_sheet_decode(
            trellis, sheet_syndromes[0], w.reshape(-1), None
        )
        es = e_sheet.reshape(tau, seed.n + n_x)
        correction[fc.code_slice(0)] = es[:, : seed.n].reshape(-1)
        correction[fc.ancilla_slice(0)] = es[:, seed.n :].reshape(-1)[:n_anc]
        _check_syndrome(fc, correction, syndrome)
        diag = Diagnostics(iterations=1, converged=True, history=[], fallback=False)
        return correction, diag

    state = ExchangeState(
        slot_lo=np.full((L, n_slot), np.nan),
        slot_hi=np.full((L, n_slot), np.nan),
    )
    # Incoming priors for each decoding sheet's (prev, next) virtual copies.
    prev_prior = [channel_slot(m - 1) for m in range(L)]
    next_prior = [channel_slot(m + 1) for m in range(L)]
    # Baseline for the first iteration's change metric: the channel prior.
    prev_lo = np.stack([channel_slot(m) for m in range(L)])
    prev_hi = prev_lo.copy()

    fallback = False
    while True:
        state.iteration += 1
        results = [
            decode_sheet(
                trellis, sheet_syndromes[m], code_priors[m],
                (prev_prior[m], next_prior[m]), boundary="free",
            )
            for m in range(L)
        ]
        for m in range(L):
            if m - 1 >= 0:
                state.slot_hi[m - 1] = results[m].ancilla_prev
            if m + 1 < L:
                state.slot_lo[m + 1] = results[m].ancilla_next
        # Fixed-point metric: change in the exchanged marginals since the
        # previous iteration (agreement alone can be a symmetric
        # non-fixed-point, e.g. two sheets equally unsure about a shared
        # ancilla).
        exchanged = ~np.isnan(state.slot_lo) & ~np.isnan(state.slot_hi)
        deltas = []
        for now, before in ((state.slot_lo, prev_lo), (state.slot_hi, prev_hi)):
            seen = exchanged & ~np.isnan(before)
            if np.any(seen):
                deltas.append(float(np.max(np.abs((now - before)[seen]))))
            elif np.any(exchanged):
                deltas.append(np.inf)
        delta = max(deltas) if deltas else 0.0
        prev_lo = state.slot_lo.copy()
        prev_hi = state.slot_hi.copy()
        state.history.append(delta)
        if delta < config.tol:
            state.converged = True
            break
        if state.iteration >= config.max_iters:
            fallback = True
            break
        # Jacobi exchange between decoding sheets m and m+-2; slots without
        # a partner keep the channel prior.
        for m in range(L):
            prev_prior[m] = (
                results[m - 2].ancilla_next if m - 2 >= 0 else channel_slot(m - 1)
            )
            next_prior[m] = (
                results[m + 2].ancilla_prev if m + 2 < L else channel_slot(m + 1)
            )

    hard = average_and_harden(state)

    correction = np.zeros(fc.n_qubits, dtype=np.uint8)
    for m in range(L):
        correction[fc.ancilla_slice(m)] = hard[m][:n_anc]
    n_sheet = sheet.n
    for m in range(L):
        pins = np.zeros((tau, n_sheet), dtype=np.uint8)
        pins[:, seed.n : seed.n + n_x] = (
            hard[m - 1].reshape(tau, n_x) if m - 1 >= 0 else 0
        )
        pins[:, seed.n + n_x :] = (
            hard[m + 1].reshape(tau, n_x) if m + 1 < L else 0
        )
        w = np.full((tau, n_sheet), np.inf)
        w[:, : seed.n] = _weights_from_priors(code_priors[m]).reshape(tau, seed.n)
        e_sheet = _pinned_sheet_decode(
            trellis, sheet_syndromes[m], w.reshape(-1), pins.reshape(-1)
        )
        es = e_sheet.reshape(tau, n_sheet)
        correction[fc.code_slice(m)] = es[:, : seed.n].reshape(-1)
    _check_syndrome(fc, correction, syndrome)
    diag = Diagnostics(
        iterations=state.iteration, converged=state.converged,
        history=state.history, fallback=fallback,
    )
    return correction, diag


def _weights_from_priors(p: np.ndarray) -> np.ndarray:
    p = np.asarray(p, dtype=float)
    clipped = np.clip(p, _MIN_P, 0.5)
    w = np.log((1.0 - clipped) / clipped)
    return np.where(p < _MIN_P, np.inf, w)


def _pinned_sheet_decode(trellis, sheet_syndrome, weights, pins) -> np.ndarray:
    """Minimum-weight sheet error with optional pinned (infinite-weight) bits.

    Pinned bits are forced to the given values by folding them into the
    pure error; the returned pattern includes them at their pinned values
    and reproduces the sheet syndrome exactly.
    """
    e0 = sheet_pure_error(trellis, sheet_syndrome)
    if pins is None:
        p, _ = min_weight_path(trellis, e0, weights, boundary="free")
        return p ^ e0
    e0_mod = e0 ^ pins
    p, _ = min_weight_path(trellis, e0_mod, weights, boundary="free")
    return (p ^ e0_mod) ^ pins


def _check_syndrome(fc, correction, syndrome):
    if not np.array_equal(extract_syndrome(fc, correction), syndrome):
        raise AssertionError("correction does not reproduce the syndrome")
