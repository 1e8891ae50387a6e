"""Decoding trellises for convolutional codes and single decoding sheets.

A trellis path chooses, frame by frame, logical inputs l_t = {l^(g); l^(h)
[; l^(J)]}; the frame output is p_t = U_p(alpha_t, l_t), a GF(2) sum of
seed rows weighted by current and remembered inputs.  The memory state
alpha_t records the last nu values of each input block, most recent first.
Paths start and end in the all-zero state, so the path set is in bijection
with the terminated row spaces of the expanded generator, stabiliser and
gauge matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .delay import DelayMatrix, DelayPoly, SeedSet

STATE_CAP = 2**20


def _coeff_blocks(mat: DelayMatrix, nu: int) -> np.ndarray:
    """Coefficient tensor C[q, i, j] of D^q in entry (i, j); shape (nu+1, rows, cols)."""
    out = np.zeros((nu + 1, mat.rows, mat.cols), dtype=np.uint8)
    for i, row in enumerate(mat.entries):
        for j, poly in enumerate(row):
            for q in poly.exponents:
                if q < 0:
                    raise ValueError("trellis matrices must be forward delay polynomials")
                out[q, i, j] = 1
    return out


@dataclass(frozen=True)
class MemoryState:
    """Trellis memory state: recent input history, most recent first.

    Attributes:
        g_history: Last nu_g generator inputs, each a tuple of k bits.
        h_history: Last nu_h stabiliser inputs, each a tuple of n_z bits.
        j_history: Last nu_j gauge inputs (sheet trellises only).
    """

    g_history: tuple[tuple[int, ...], ...]
    h_history: tuple[tuple[int, ...], ...]
    j_history: tuple[tuple[int, ...], ...] = ()

    def bits(self) -> tuple[int, ...]:
        flat: list[int] = []
        for hist in (self.g_history, self.h_history, self.j_history):
            for vec in hist:
                flat.extend(vec)
        return tuple(flat)


@dataclass(frozen=True)
class Transition:
    """One trellis edge: from-state, input bits, frame output, to-state."""

    from_state: int
    l_bits: tuple[int, ...]
    pattern: tuple[int, ...]
    to_state: int


def _pack_bits(bits: np.ndarray) -> np.ndarray:
    """Packs rows of bits into integers, first bit most significant."""
    width = bits.shape[-1]
    weights = 1 << np.arange(width - 1, -1, -1, dtype=np.int64)
    return bits.astype(np.int64) @ weights


def _unpack_bits(values: np.ndarray, width: int) -> np.ndarray:
    shifts = np.arange(width - 1, -1, -1, dtype=np.int64)
    return ((np.asarray(values, dtype=np.int64)[..., None] >> shifts) & 1).astype(np.uint8)


@dataclass
class Trellis:
    """Time-homogeneous trellis with zero start and end states.

    `next_state[s, m]` and `out_pattern[s, m]` give the successor state and
    the packed frame output for state index `s` under input index `m`;
    input and pattern integers are packed first-bit-most-significant, so
    ascending input index is ascending lexicographic l order.
    """

    seed: SeedSet
    tau: int
    n: int
    widths: tuple[int, int, int]  # (k, n_z, j_w) input block widths
    memories: tuple[int, int, int]  # (nu_g, nu_h, nu_j)
    n_states: int
    n_inputs: int
    next_state: np.ndarray
    out_pattern: np.ndarray

    @property
    def state_bits(self) -> int:
        k, n_z, j_w = self.widths
        nu_g, nu_h, nu_j = self.memories
        return k * nu_g + n_z * nu_h + j_w * nu_j

    @property
    def in_bits(self) -> int:
        return sum(self.widths)

    def state(self, index: int) -> MemoryState:
        k, n_z, j_w = self.widths
        nu_g, nu_h, nu_j = self.memories
        bits = _unpack_bits(np.array(index), self.state_bits).tolist()
        pos = 0
        hists = []
        for w, nu in ((k, nu_g), (n_z, nu_h), (j_w, nu_j)):
            hist = []
            for _ in range(nu):
                hist.append(tuple(bits[pos : pos + w]))
                pos += w
            hists.append(tuple(hist))
        return MemoryState(*hists)

    def transitions_from(self, s: int) -> list[Transition]:
        out = []
        for m in range(self.n_inputs):
            out.append(
                Transition(
                    from_state=s,
                    l_bits=tuple(_unpack_bits(np.array(m), self.in_bits).tolist()),
                    pattern=tuple(
                        _unpack_bits(np.array(self.out_pattern[s, m]), self.n).tolist()
                    ),
                    to_state=int(self.next_state[s, m]),
                )
            )
        return out

    def dump(self) -> str:
        lines = [
            f"frames={self.tau} width={self.n} states={self.n_states} "
            f"inputs={self.n_inputs}"
        ]
        for s in range(self.n_states):
            for tr in self.transitions_from(s):
                lines.append(
                    f"{tr.from_state:>4} -> {tr.to_state:<4} "
                    f"l={''.join(map(str, tr.l_bits))} "
                    f"p={''.join(map(str, tr.pattern))}"
                )
        return "\n".join(lines)


def _seed_blocks(seed: SeedSet):
    """Returns (matrices, widths, memories) for the G/H_Z/J_Z input blocks."""
    mats = [seed.generator, seed.stabiliser]
    if seed.gauge_z is not None:
        mats.append(seed.gauge_z)
    widths = [m.rows for m in mats] + [0] * (3 - len(mats))
    memories = [m.max_degree for m in mats] + [0] * (3 - len(mats))
    return mats, tuple(widths), tuple(memories)


def u_p(seed: SeedSet, alpha: MemoryState, l: np.ndarray) -> np.ndarray:
    """Frame output for memory state `alpha` and current input `l`.

    Args:
        seed: Seed family whose generator/stabiliser (and gauge, if any)
            rows parametrize paths.
        alpha: Memory state holding the previous inputs, most recent first.
        l: Current input bits, generator block first.

    Returns:
        Frame output bits of width n.
    """
    mats, widths, memories = _seed_blocks(seed)
    l = np.asarray(l, dtype=np.uint8)
    if l.shape[0] != sum(widths):
        raise ValueError("input width mismatch")
    hists = (alpha.g_history, alpha.h_history, alpha.j_history)
    n = mats[0].cols
    p = np.zeros(n, dtype=np.uint8)
    pos = 0
    for mat, w, nu, hist in zip(mats, widths[: len(mats)], memories, hists):
        if len(hist) != nu or any(len(v) != w for v in hist):
            raise ValueError("memory state width mismatch")
        coeff = _coeff_blocks(mat, nu)
        vecs = [l[pos : pos + w]] + [np.asarray(v, dtype=np.uint8) for v in hist]
        for q, vec in enumerate(vecs):
            p ^= (vec.astype(np.int64) @ coeff[q]) % 2 == 1
        pos += w
    return p.astype(np.uint8)


def build_trellis(seed: SeedSet, tau: int, state_cap: int = STATE_CAP) -> Trellis:
    """Builds the full decoding trellis for `tau` frames.

    Raises:
        ValueError: If tau is smaller than the total memory, or the state
            count exceeds `state_cap`.
    """
    mats, widths, memories = _seed_blocks(seed)
    if tau < sum(memories):
        raise ValueError("tau must be at least the total memory length")
    n = mats[0].cols
    sb = sum(w * nu for w, nu in zip(widths, memories))
    ib = sum(widths)
    if 2**sb > state_cap:
        raise ValueError(f"state count 2^{sb} exceeds cap {state_cap}")
    n_states, n_inputs = 2**sb, 2**ib

    state_bits = _unpack_bits(np.arange(n_states), sb)
    input_bits = _unpack_bits(np.arange(n_inputs), ib)

    # Frame output: p = sum_q v_q @ C_q with v_0 the input and v_{q>=1}
    # from the state history.
    state_part = np.zeros((n_states, n), dtype=np.uint8)
    input_part = np.zeros((n_inputs, n), dtype=np.uint8)
    spos = ipos = 0
    for mat, w, nu in zip(mats, widths[: len(mats)], memories):
        coeff = _coeff_blocks(mat, nu)
        input_part ^= (input_bits[:, ipos : ipos + w].astype(np.int64) @ coeff[0]) % 2 == 1
        for q in range(1, nu + 1):
            block = state_bits[:, spos + (q - 1) * w : spos + q * w]
            state_part ^= (block.astype(np.int64) @ coeff[q]) % 2 == 1
        spos += w * nu
        ipos += w
    out_bits = state_part[:, None, :] ^ input_part[None, :, :]
    out_pattern = _pack_bits(out_bits.reshape(-1, n)).reshape(n_states, n_inputs)

    # Successor state: per block, drop the oldest entry and prepend l.
    s_idx = np.arange(n_states, dtype=np.int64)[:, None]
    m_idx = np.arange(n_inputs, dtype=np.int64)[None, :]
    next_state = np.zeros((n_states, n_inputs), dtype=np.int64)
    s_shift = sb
    i_shift = ib
    for w, nu in zip(widths, memories):
        s_shift -= w * nu
        i_shift -= w
        hist = (s_idx >> s_shift) & ((1 << (w * nu)) - 1)
        cur = (m_idx >> i_shift) & ((1 << w) - 1)
        if nu > 0:
            new_hist = (cur << (w * (nu - 1))) | (hist >> w)
            next_state |= new_hist << s_shift
    return Trellis(
        seed=seed, tau=tau, n=n, widths=widths, memories=memories,
        n_states=n_states, n_inputs=n_inputs,
        next_state=next_state, out_pattern=out_pattern,
    )


def build_sheet_seed(base: SeedSet, copies: int = 2) -> SeedSet:
    """Augments a CSS convolutional seed into a single-decoding-sheet seed.

    The sheet code appends copies*n_x virtual ancilla columns per frame
    (the neighbouring sheets' ancillas for copies=2; the in-sheet ancillas
    of the single-sheet faulty-syndrome model for copies=1): the
    generator, ISF and Z stabiliser are zero-padded, the parity becomes
    [H_X | I | I] (one identity per copy), and gauge pairs account for the
    new degrees of freedom: J_X is the identity pattern on the virtual
    columns and each J_Z row is the Z pseudo-inverse row extended by the
    matching identity column, which commutes with the padded generator,
    parity and ISF while pairing with exactly one J_X row.
    """
    k, n, n_x, n_z = base.rates
    if n_x == 0:
        return base
    if base.isf is None:
        raise ValueError("sheet gauges require the base pseudo-inverse")
    if copies not in (1, 2):
        raise ValueError("copies must be 1 or 2")
    width = n + copies * n_x
    zero = DelayPoly.zero()
    one = DelayPoly.one()

    def pad(mat: DelayMatrix) -> DelayMatrix:
        return DelayMatrix([list(row) + [zero] * (copies * n_x) for row in mat.entries])

    def virt_identity(block: int, i: int) -> list[DelayPoly]:
        cols = [zero] * (copies * n_x)
        cols[block * n_x + i] = one
        return cols

    parity = DelayMatrix(
        [
            list(row)
            + [one if j % n_x == i else zero for j in range(copies * n_x)]
            for i, row in enumerate(base.parity.entries)
        ]
    )
    gauge_x = DelayMatrix(
        [[zero] * n + virt_identity(b, i) for b in range(copies) for i in range(n_x)]
    )
    gauge_z = DelayMatrix(
        [list(base.isf.entries[i]) + virt_identity(b, i)
         for b in range(copies) for i in range(n_x)]
    )
    return SeedSet(
        generator=pad(base.generator),
        parity=parity,
        isf=pad(base.isf),
        rates=(k, width, n_x, n_z),
        stabiliser=pad(base.stabiliser),
        gauge_z=gauge_z,
        gauge_x=gauge_x,
        name=(base.name + "-sheet") if base.name else "sheet",
    )


def frame_weight_table(trellis: Trellis, e0: np.ndarray, weights=None) -> np.ndarray:
    """W[t, pattern] = weight of the frame error (pattern XOR e0_t).

    Args:
        e0: Pure error, length n*tau, frame-major.
        weights: Optional per-qubit weights (length n*tau); defaults to
            Hamming weight.  Infinite weights pin qubits to no-error.
    """
    n, tau = trellis.n, trellis.tau
    e0 = np.asarray(e0, dtype=np.uint8).reshape(tau, n)
    patterns = _unpack_bits(np.arange(2**n), n)  # (2^n, n)
    if weights is None:
        weights = np.ones(tau * n)
    weights = np.asarray(weights, dtype=float).reshape(tau, n)
    err = patterns[None, :, :] ^ e0[:, None, :]  # (tau, 2^n, n)
    with np.errstate(invalid="ignore"):
        table = np.where(err == 1, weights[:, None, :], 0.0).sum(axis=2)
    return table


def min_weight_path(
    trellis: Trellis, e0: np.ndarray, weights=None, boundary: str = "terminated"
) -> tuple[np.ndarray, np.ndarray]:
    """Minimum-weight valid decoding path.

    Finds the path p minimizing the weighted size of p + e0; ties resolve
    to the lexicographically smallest l-sequence (and smallest start state
    for free boundaries).

    Args:
        trellis: Built trellis.
        e0: Pure error, length n*tau.
        weights: Optional per-qubit weights, as in frame_weight_table.
        boundary: `terminated` restricts paths to the zero start/end state;
            `free` allows any start/end state, which adds the
            boundary-truncated row shifts to the reachable patterns.

    Returns:
        (p_min, l_seq): the path pattern (length n*tau) and the per-frame
        input bit rows, shape (tau, in_bits).
    """
    if boundary not in ("terminated", "free"):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    n, tau = trellis.n, trellis.tau
    W = frame_weight_table(trellis, e0, weights)
    nxt, out = trellis.next_state, trellis.out_pattern
    # Suffix costs to an admissible end state.
    B = np.full((tau + 1, trellis.n_states), np.inf)
    if boundary == "terminated":
        B[tau, 0] = 0.0
    else:
        B[tau, :] = 0.0
    for t in range(tau - 1, -1, -1):
        cost = W[t][out] + B[t + 1][nxt]
        B[t] = cost.min(axis=1)
    if boundary == "terminated":
        s = 0
    else:
        s = int(np.flatnonzero(B[0] <= B[0].min() + 1e-9)[0])
    if not np.isfinite(B[0, s]):
        raise ValueError("no valid path through the trellis")
    p_min = np.zeros((tau, n), dtype=np.uint8)
    l_seq = np.zeros((tau, trellis.in_bits), dtype=np.uint8)
    for t in range(tau):
        cand = W[t][out[s]] + B[t + 1][nxt[s]]
        m = int(np.flatnonzero(cand <= cand.min() + 1e-9)[0])
        p_min[t] = _unpack_bits(np.array(out[s, m]), n)
        l_seq[t] = _unpack_bits(np.array(m), trellis.in_bits)
        s = int(nxt[s, m])
    return p_min.reshape(-1), l_seq
