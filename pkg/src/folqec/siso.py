"""Soft-input soft-output trellis decoding: forward/backward passes and
local update, with sum-product and max-sum variants.

Arithmetic runs in the linear probability domain with per-frame
renormalization, which is exact up to the absorbed constants: every frame
rescales the state table to unit sum, so no underflow can occur at these
trellis sizes.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from . import gf2
from .delay import expand
from .trellis import Trellis, _unpack_bits


@dataclass
class PassTable:
    """Forward/backward state likelihood tables, shape (tau+1, n_states)."""

    values: np.ndarray


@dataclass
class MarginalTable:
    """Marginal distributions produced by the local update.

    Attributes:
        frame_tables: Distribution per frame; over frame error patterns
            (physical table, indexed by packed pattern) or over input
            symbols (logical table, indexed by packed input).
        per_bit: Per-bit marginal probability of 1, shape (tau, width).
    """

    frame_tables: np.ndarray
    per_bit: np.ndarray


def frame_likelihood_table(trellis: Trellis, e0, priors) -> np.ndarray:
    """L[t, pattern] = prior probability of the frame error (pattern XOR e0_t)."""
    n, tau = trellis.n, trellis.tau
    e0 = np.asarray(e0, dtype=np.uint8).reshape(tau, n)
    priors = np.asarray(priors, dtype=float).reshape(tau, n)
    patterns = _unpack_bits(np.arange(2**n), n)
    err = patterns[None, :, :] ^ e0[:, None, :]
    p = priors[:, None, :]
    return np.where(err == 1, p, 1.0 - p).prod(axis=2)


def input_prior_table(trellis: Trellis, bit_priors=None) -> np.ndarray:
    """Pr(l_t) table of shape (tau, n_inputs).

    Args:
        bit_priors: Optional per-input-bit probabilities of 1, shape
            (tau, in_bits); independent bits.  Defaults to uniform.
    """
    tau, ib = trellis.tau, trellis.in_bits
    if bit_priors is None:
        return np.full((tau, trellis.n_inputs), 1.0 / trellis.n_inputs)
    bit_priors = np.asarray(bit_priors, dtype=float).reshape(tau, ib)
    bits = _unpack_bits(np.arange(trellis.n_inputs), ib)
    p = bit_priors[:, None, :]
    return np.where(bits[None, :, :] == 1, p, 1.0 - p).prod(axis=2)


def _edge_weights(trellis, like_t, l_prior_t):
    return like_t[trellis.out_pattern] * l_prior_t[None, :]


def forward_pass(
    trellis: Trellis, e0, priors, logical_priors=None, mode: str = "sum",
    boundary: str = "terminated",
) -> PassTable:
    """State likelihoods A(alpha_t) from the admissible start states.

    Args:
        trellis: Built trellis.
        e0: Pure error (length n*tau) consistent with the syndrome.
        priors: Per-qubit error probabilities, length n*tau.
        logical_priors: Optional Pr(l_t) table, shape (tau, n_inputs).
        mode: "sum" (sum-product) or "max" (max-sum).
        boundary: `terminated` starts in the zero state; `free` starts
            uniformly over all states (boundary-truncated paths allowed).

    Raises:
        ValueError: If some frame has zero total mass ("trellis
            unsatisfiable").
    """
    like = frame_likelihood_table(trellis, e0, priors)
    l_prior = input_prior_table(trellis) if logical_priors is None else logical_priors
    S = trellis.n_states
    A = np.zeros((trellis.tau + 1, S))
    if boundary == "terminated":
        A[0, 0] = 1.0
    else:
        A[0, :] = 1.0 / S
    flat_next = trellis.next_state.ravel()
    for t in range(trellis.tau):
        w = (A[t][:, None] * _edge_weights(trellis, like[t], l_prior[t])).ravel()
        if mode == "sum":
            np.add.at(A[t + 1], flat_next, w)
        else:
            np.maximum.at(A[t + 1], flat_next, w)
        total = A[t + 1].sum()
        if total <= 0.0:
            raise ValueError("trellis unsatisfiable")
        A[t + 1] /= total
    return PassTable(values=A)


def backward_pass(
    trellis: Trellis, e0, priors, logical_priors=None, mode: str = "sum",
    boundary: str = "terminated",
) -> PassTable:
    """State likelihoods B(alpha_t) from the admissible end states (mirror of forward)."""
    like = frame_likelihood_table(trellis, e0, priors)
    l_prior = input_prior_table(trellis) if logical_priors is None else logical_priors
    S = trellis.n_states
    B = np.zeros((trellis.tau + 1, S))
    if boundary == "terminated":
        B[trellis.tau, 0] = 1.0
    else:
        B[trellis.tau, :] = 1.0 / S
    for t in range(trellis.tau - 1, -1, -1):
        w = _edge_weights(trellis, like[t], l_prior[t]) * B[t + 1][trellis.next_state]
        if mode == "sum":
            B[t] = w.sum(axis=1)
        else:
            B[t] = w.max(axis=1)
        total = B[t].sum()
        if total <= 0.0:
            raise ValueError("trellis unsatisfiable")
        B[t] /= total
    return PassTable(values=B)


def local_update(
    trellis: Trellis, A: PassTable, B: PassTable, e0, priors,
    logical_priors=None, mode: str = "sum",
) -> tuple[MarginalTable, MarginalTable]:
    """Frame-pattern and logical-input marginals from both passes.

    Returns:
        (P_phys, P_log): P_phys.frame_tables[t] is the distribution over
        frame *error* patterns (p_t XOR e0_t, packed); P_phys.per_bit are
        per-qubit error marginals.  P_log is over input symbols l_t.
    """
    n, tau = trellis.n, trellis.tau
    like = frame_likelihood_table(trellis, e0, priors)
    l_prior = input_prior_table(trellis) if logical_priors is None else logical_priors
    e0_int = (
        np.asarray(e0, dtype=np.uint8).reshape(tau, n)
        @ (1 << np.arange(n - 1, -1, -1))
    ).astype(np.int64)
    P_err = np.zeros((tau, 2**n))
    P_log = np.zeros((tau, trellis.n_inputs))
    for t in range(tau):
        E = (
            A.values[t][:, None]
            * _edge_weights(trellis, like[t], l_prior[t])
            * B.values[t + 1][trellis.next_state]
        )
        if mode == "sum":
            row = np.bincount(
                (trellis.out_pattern ^ e0_int[t]).ravel(),
                weights=E.ravel(), minlength=2**n,
            )
            log_row = E.sum(axis=0)
        else:
            row = np.zeros(2**n)
            np.maximum.at(row, (trellis.out_pattern ^ e0_int[t]).ravel(), E.ravel())
            log_row = E.max(axis=0)
        for label, vec in (("physical", row), ("logical", log_row)):
            if vec.sum() <= 0.0:
                raise ValueError(f"unsatisfiable: zero {label} mass at frame {t}")
        P_err[t] = row / row.sum()
        P_log[t] = log_row / log_row.sum()
    pattern_bits = _unpack_bits(np.arange(2**n), n)
    per_qubit = P_err @ pattern_bits
    input_bits = _unpack_bits(np.arange(trellis.n_inputs), trellis.in_bits)
    per_input_bit = P_log @ input_bits
    return (
        MarginalTable(frame_tables=P_err, per_bit=per_qubit),
        MarginalTable(frame_tables=P_log, per_bit=per_input_bit),
    )


def extrinsic_bits(posterior: np.ndarray, prior: np.ndarray) -> np.ndarray:
    """Extrinsic per-bit probabilities: posterior with the prior divided out.

    Computes the renormalized odds ratio elementwise; degenerate priors (0
    or 1) pass the posterior through unchanged.
    """
    posterior = np.asarray(posterior, dtype=float)
    prior = np.asarray(prior, dtype=float)
    safe = (prior > 0.0) & (prior < 1.0)
    num = np.where(safe, posterior / np.where(safe, prior, 1.0), posterior)
    den = np.where(
        safe, (1.0 - posterior) / np.where(safe, 1.0 - prior, 1.0), 1.0 - posterior
    )
    return num / (num + den)


@dataclass
class SheetDecodeResult:
    """Per-qubit posteriors for one decoding sheet.

    Attributes:
        code: Marginals on the sheet's own qubits, length n*tau.
        ancilla_prev: Marginals on the virtual ancillas of sheet m-1.
        ancilla_next: Marginals on the virtual ancillas of sheet m+1.
        logical: Logical/gauge input marginal table.
        pure_error: The e0 used, length n_sheet*tau.
    """

    code: np.ndarray
    ancilla_prev: np.ndarray
    ancilla_next: np.ndarray
    logical: MarginalTable
    pure_error: np.ndarray


def sheet_pure_error(trellis: Trellis, syndrome: np.ndarray) -> np.ndarray:
    """Pure error for a sheet syndrome via the sheet pseudo-inverse."""
    seed = trellis.seed
    parity = expand(seed.parity, trellis.tau, "terminated")
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if syndrome.shape[0] != parity.shape[0]:
        raise ValueError("syndrome length mismatch")
    isf_rows = expand(seed.isf, trellis.tau, "open")[: parity.shape[0]]
    e0 = gf2.matmul(isf_rows.T, syndrome)
    if not np.array_equal(gf2.matmul(parity, e0), syndrome):
        raise ValueError("pure error does not reproduce the syndrome")
    return e0


def decode_sheet(
    trellis: Trellis, syndrome, code_priors, ancilla_priors,
    logical_priors=None, mode: str = "sum", boundary: str = "terminated",
) -> SheetDecodeResult:
    """Full SISO decode of one decoding sheet.

    Args:
        trellis: Sheet trellis (virtual-ancilla augmented seed).
        syndrome: Sheet syndrome bits, one per terminated check row.
        code_priors: Error priors on the sheet's own qubits, length
            n_base*tau.
        ancilla_priors: Pair (prev, next) of priors for the virtual
            ancilla copies, each length n_x*tau.
        logical_priors: Optional per-generator-bit priors, shape
            (tau, k); gauge inputs stay uniform.
        mode: "sum" or "max".
        boundary: Trellis boundary condition, as in forward_pass.

    Returns:
        SheetDecodeResult with updated marginals.
    """
    seed = trellis.seed
    k, n_sheet, n_x, _ = seed.rates
    n_virtual = seed.gauge_x.rows if seed.gauge_x is not None else 0
    copies = n_virtual // n_x if n_x else 0
    n_base = n_sheet - n_virtual
    tau = trellis.tau
    if copies == 1:
        blocks = (ancilla_priors[0] if isinstance(ancilla_priors, tuple)
                  else ancilla_priors,)
    else:
        blocks = tuple(ancilla_priors)
    priors = np.zeros((tau, n_sheet))
    priors[:, :n_base] = np.asarray(code_priors, dtype=float).reshape(tau, n_base)
    for b, block in enumerate(blocks):
        cols = slice(n_base + b * n_x, n_base + (b + 1) * n_x)
        priors[:, cols] = np.asarray(block, dtype=float).reshape(tau, n_x)
    priors = priors.reshape(-1)

    l_prior = None
    if logical_priors is not None:
        bit_priors = np.full((tau, trellis.in_bits), 0.5)
        bit_priors[:, :k] = np.asarray(logical_priors, dtype=float).reshape(tau, k)
        l_prior = input_prior_table(trellis, bit_priors)

    e0 = sheet_pure_error(trellis, syndrome)
    A = forward_pass(trellis, e0, priors, l_prior, mode, boundary)
    B = backward_pass(trellis, e0, priors, l_prior, mode, boundary)
    p_phys, p_log = local_update(trellis, A, B, e0, priors, l_prior, mode)
    marg = p_phys.per_bit.reshape(tau, n_sheet)
    anc_prev = marg[:, n_base : n_base + n_x].reshape(-1)
    if copies == 2:
        anc_next = marg[:, n_base + n_x :].reshape(-1)
    else:
        anc_next = np.zeros(0)
    return SheetDecodeResult(
        code=marg[:, :n_base].reshape(-1),
        ancilla_prev=anc_prev,
        ancilla_next=anc_next,
        logical=p_log,
        pure_error=e0,
    )
