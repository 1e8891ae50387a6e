"""Turbo codes: interleaved concatenation of two convolutional codes and
the iterative inner/outer decoding loop.

The outer code's physical stream is permuted by an interleaver and fed,
one position per logical input, into the inner code.  The foliated cluster
is the cluster of the composite CSS code whose Z stabilisers are the inner
checks plus the inner-encoded outer checks; the outer code qubits consumed
during construction survive as `transient` error locations whose Z errors
act as encoded inner-logical patterns on the cluster.

Decoding alternates inner sheet decoders (which estimate the per-position
logical class of the inner error) and outer sheet decoders (which see
those classes, XOR transient errors, as their physical variables), with
extrinsic feedback in both directions.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .codes import CssCode, FoliatedCode, convolutional_code, foliate
from .delay import SeedSet, expand
from .siso import decode_sheet, extrinsic_bits, sheet_pure_error
from .trellis import STATE_CAP, build_sheet_seed, build_trellis, min_weight_path

_MIN_P = 1e-12


@dataclass(frozen=True)
class Interleaver:
    """A bijection over the outer code's physical stream positions.

    Position i of the permuted (inner-side) stream carries bit
    `permutation[i]` of the outer-side stream.
    """

    kind: str
    permutation: tuple

    def __post_init__(self):
        perm = np.asarray(self.permutation)
        if sorted(perm.tolist()) != list(range(len(perm))):
            raise ValueError("interleaver permutation is not a bijection")

    @property
    def length(self) -> int:
        return len(self.permutation)

    @property
    def inverse(self) -> np.ndarray:
        inv = np.empty(self.length, dtype=np.int64)
        inv[np.asarray(self.permutation)] = np.arange(self.length)
        return inv

    def apply(self, vec):
        """Outer-side sequence -> inner-side sequence."""
        vec = np.asarray(vec)
        if vec.shape[0] != self.length:
            raise ValueError("length mismatch")
        return vec[np.asarray(self.permutation)]

    def unapply(self, vec):
        """Inner-side sequence -> outer-side sequence."""
        vec = np.asarray(vec)
        if vec.shape[0] != self.length:
            raise ValueError("length mismatch")
        return vec[self.inverse]


def transpose_interleave(frames, width: int):
    """Reorders a frame-major stream into position-major order.

    Args:
        frames: Sequence of length width*tau, frame-major (frame index
            major, position within the frame minor).
        width: Frame width n.

    Returns:
        numpy array (p1 of every frame, then p2 of every frame, ...).

    Raises:
        ValueError: If the length is not divisible by width.
    """
    frames = np.asarray(frames)
    if width <= 0 or frames.shape[0] % width:
        raise ValueError("length not divisible by frame width")
    tau = frames.shape[0] // width
    return frames.reshape(tau, width).T.reshape(-1)


def make_interleaver(kind: str, length: int, width: int = 1, rng_seed: int = 0) -> Interleaver:
    """Builds an interleaver of the given kind.

    Args:
        kind: "identity", "transpose" (needs `width`), or "random"
            (uniform permutation from `rng_seed`).
        length: Stream length.
        width: Frame width for the transpose kind.
        rng_seed: Seed for the random kind.
    """
    if kind == "identity":
        perm = np.arange(length)
    elif kind == "transpose":
        perm = transpose_interleave(np.arange(length), width)
    elif kind == "random":
        perm = np.random.default_rng(rng_seed).permutation(length)
    else:
        raise ValueError(f"unknown interleaver kind {kind!r}")
    return Interleaver(kind=kind, permutation=tuple(int(x) for x in perm))


@dataclass(frozen=True)
class TurboCodeSpec:
    """Two convolutional seed families joined by an interleaver kind."""

    inner: SeedSet
    outer: SeedSet
    interleaver_kind: str = "random"
    rng_seed: int = 0
    name: str = "custom"
    distance: int | None = None


@dataclass
class TurboCode:
    """A foliated turbo code plus its layered decoding structure.

    Error locations are the cluster qubits of the composite foliated code
    followed, per sheet, by the transient outer positions (inner-side
    order); a transient Z error acts on the cluster as the corresponding
    encoded inner-logical pattern on that sheet's code qubits.
    """

    spec: TurboCodeSpec
    tau_out: int
    tau_in: int
    sheets: int
    interleaver: Interleaver
    fc: FoliatedCode
    encode_rows: np.ndarray  # (n_positions, n_inner): encoded logical images
    n_positions: int
    n_inner_checks: int
    n_outer_checks: int

    @property
    def k(self) -> int:
        return self.fc.base.k

    @property
    def n_locations(self) -> int:
        return self.fc.n_qubits + self.sheets * self.n_positions

    def transient_slice(self, m: int) -> slice:
        start = self.fc.n_qubits + m * self.n_positions
        return slice(start, start + self.n_positions)

    def cluster_image(self, locations) -> np.ndarray:
        """Maps an error-location vector onto the cluster qubits."""
        locations = np.asarray(locations, dtype=np.uint8)
        if locations.shape[0] != self.n_locations:
            raise ValueError("error location vector length mismatch")
        img = locations[: self.fc.n_qubits].copy()
        for m in range(self.sheets):
            lam = locations[self.transient_slice(m)]
            if lam.any():
                cs = self.fc.code_slice(m)
                img[cs] ^= gf2.matmul(self.encode_rows.T, lam)
        return img

    def inner_check_rows(self, m: int) -> list:
        return [
            i for i, (mm, h) in enumerate(self.fc.sheet_parity)
            if mm == m and h < self.n_inner_checks
        ]

    def outer_check_rows(self, m: int) -> list:
        return [
            i for i, (mm, h) in enumerate(self.fc.sheet_parity)
            if mm == m and h >= self.n_inner_checks
        ]


def build_turbo(spec: TurboCodeSpec, tau_out: int, L: int = 1) -> TurboCode:
    """Builds the foliated turbo code for an outer frame count.

    The inner frame count is chosen so every outer physical position has a
    full (untruncated) inner logical row: tau_in = positions/k_in + nu_g.

    Raises:
        ValueError: If the outer physical width is not a multiple of the
            inner logical width (rates do not compose).
    """
    inner, outer = spec.inner, spec.outer
    k_in = inner.rates[0]
    n_positions = outer.n * tau_out
    if n_positions % k_in:
        raise ValueError("outer physical outputs do not fill inner frames")
    nu_g = inner.generator.max_degree
    tau_in = n_positions // k_in + nu_g
    inner_code = convolutional_code(inner, tau_in)
    if inner_code.k != n_positions:
        raise ValueError("rate mismatch between outer outputs and inner inputs")

    interleaver = make_interleaver(
        spec.interleaver_kind, n_positions, width=outer.n, rng_seed=spec.rng_seed
    )
    inv = interleaver.inverse
    # encode_rows[i] = inner logical image of inner-side position i; the
    # outer-side position j maps to inner-side position inv[j].
    encode_rows = inner_code.logical_z.copy()

    def encode_outer(rows: np.ndarray) -> np.ndarray:
        out = np.zeros((rows.shape[0], inner_code.n), dtype=np.uint8)
        for r, row in enumerate(rows):
            img = np.zeros(inner_code.n, dtype=np.uint8)
            for j in np.nonzero(row)[0]:
                img ^= encode_rows[inv[j]]
            out[r] = img
        return out

    outer_h = expand(outer.parity, tau_out, "terminated")
    outer_g = expand(outer.generator, tau_out, "terminated")
    encoded_h = encode_outer(outer_h)
    encoded_g = encode_outer(outer_g)

    sx = np.vstack([inner_code.sx, encoded_h])
    composite = CssCode(
        n=inner_code.n, k=encoded_g.shape[0],
        sx=sx, sz=sx.copy(),
        logical_x=encoded_g, logical_z=encoded_g.copy(),
        name=spec.name,
    )
    composite.validate()
    fc = foliate(composite, L)
    return TurboCode(
        spec=spec, tau_out=tau_out, tau_in=tau_in, sheets=L,
        interleaver=interleaver, fc=fc, encode_rows=encode_rows,
        n_positions=n_positions,
        n_inner_checks=inner_code.sx.shape[0],
        n_outer_checks=outer_h.shape[0],
    )


def turbo_syndrome(tc: TurboCode, locations) -> np.ndarray:
    """Syndrome of an error-location vector (cluster + transient parts)."""
    return gf2.matmul(tc.fc.parity_checks, tc.cluster_image(locations))


def turbo_is_failure(tc: TurboCode, residual) -> tuple[bool, int]:
    """Logical-failure test on an error-location residual."""
    eps = gf2.matmul(tc.fc.readout, tc.cluster_image(residual))
    bit_failures = int(eps.sum())
    return bit_failures > 0, bit_failures


@dataclass
class TurboDecodeConfig:
    """Iteration counts and numerical knobs for turbo decoding.

    Attributes:
        rounds: Feedback rounds (0 = strict inner-then-outer pipeline).
        exchange_iters: Inner/outer sheet-exchange iterations per round.
        state_cap: Trellis state guard.
    """

    rounds: int = 5
    exchange_iters: int = 3
    state_cap: int = STATE_CAP


@dataclass
class TurboDiagnostics:
    rounds: int
    history: list = field(default_factory=list)


def _xor_probs(a, b):
    """P(x ^ y = 1) for independent bits with P(x=1)=a, P(y=1)=b."""
    return a * (1.0 - b) + b * (1.0 - a)


def _weights_from_priors(p: np.ndarray) -> np.ndarray:
    """Log-likelihood weights from posterior marginals.

    Marginals above 1/2 give negative weights (flipping is favoured);
    marginals at 0 pin the bit to no-error.
    """
    p = np.asarray(p, dtype=float)
    clipped = np.clip(p, _MIN_P, 1.0 - _MIN_P)
    w = np.log((1.0 - clipped) / clipped)
    return np.where(p < _MIN_P, np.inf, w)


def turbo_decode(
    tc: TurboCode, syndrome, priors, config: TurboDecodeConfig | None = None
) -> tuple[np.ndarray, TurboDiagnostics]:
    """Decodes a foliated turbo code instance.

    Args:
        tc: Turbo code.
        syndrome: Bits over tc.fc.parity_checks rows.
        priors: Per-location error probability (scalar or length
            tc.n_locations).
        config: Iteration configuration.

    Returns:
        (correction over error locations, diagnostics); the correction's
        syndrome always equals the input.
    """
    if config is None:
        config = TurboDecodeConfig()
    L = tc.sheets
    fc = tc.fc
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if syndrome.shape[0] != fc.parity_checks.shape[0]:
        raise ValueError("syndrome length mismatch")
    priors = np.asarray(priors, dtype=float)
    if priors.ndim == 0:
        priors = np.full(tc.n_locations, float(priors))
    if priors.shape[0] != tc.n_locations:
        raise ValueError("prior length mismatch")
    correction = np.zeros(tc.n_locations, dtype=np.uint8)
    if not np.any(syndrome):
        return correction, TurboDiagnostics(rounds=0)

    inner, outer = tc.spec.inner, tc.spec.outer
    k_in = inner.rates[0]
    copies = 1 if L == 1 else 2
    in_sheet = build_sheet_seed(inner, copies=copies)
    out_sheet = build_sheet_seed(outer, copies=copies)
    in_trellis = build_trellis(in_sheet, tc.tau_in, state_cap=config.state_cap)
    out_trellis = build_trellis(out_sheet, tc.tau_out, state_cap=config.state_cap)

    nx_in, nx_out = inner.rates[2], outer.rates[2]
    n_in_slot, n_out_slot = nx_in * tc.tau_in, nx_out * tc.tau_out
    perm = np.asarray(tc.interleaver.permutation)
    inv = tc.interleaver.inverse

    s_in = [syndrome[tc.inner_check_rows(m)] for m in range(L)]
    s_out = [syndrome[tc.outer_check_rows(m)] for m in range(L)]
    code_priors = [priors[fc.code_slice(m)] for m in range(L)]
    anc_priors = [priors[fc.ancilla_slice(m)] for m in range(L)]
    trans_priors = [priors[tc.transient_slice(m)] for m in range(L)]

    def channel_in_slot(mm):
        arr = np.zeros(n_in_slot)
        if 0 <= mm < L:
            arr[: tc.n_inner_checks] = anc_priors[mm][: tc.n_inner_checks]
        return arr

    def channel_out_slot(mm):
        arr = np.zeros(n_out_slot)
        if 0 <= mm < L:
            arr[: tc.n_outer_checks] = anc_priors[mm][tc.n_inner_checks :]
        return arr

    def exchange_stage(decode_one, channel_slot):
        """Runs `exchange_iters` Jacobi sweeps of one decoding stage."""
        # With a single sheet the one ancilla block is the sheet's own
        # in-sheet ancillas; otherwise the blocks mirror sheets m-1, m+1.
        prev_p = [channel_slot(m if L == 1 else m - 1) for m in range(L)]
        next_p = [channel_slot(m + 1) for m in range(L)]
        results = None
        for _ in range(config.exchange_iters):
            results = [decode_one(m, prev_p[m], next_p[m]) for m in range(L)]
            if L == 1:
                continue
            for m in range(L):
                prev_p[m] = (
                    results[m - 2].ancilla_next if m - 2 >= 0 else channel_slot(m - 1)
                )
                next_p[m] = (
                    results[m + 2].ancilla_prev if m + 2 < L else channel_slot(m + 1)
                )
        return results

    # Per-sheet class prior on inner logical inputs; position i of sheet m
    # carries outer stream bit perm[i].
    def class_priors(prior_out):
        """Outer-side class estimates -> inner logical bit priors (tau_in, k)."""
        out = []
        for m in range(L):
            # Boundary-frame inputs beyond the full logical rows stay
            # uninformative so truncated paths remain admissible.
            bits = np.full(tc.tau_in * k_in, 0.5)
            bits[: tc.n_positions] = prior_out[m][perm]  # inner-side order
            out.append(bits.reshape(tc.tau_in, k_in))
        return out

    # Outer-side prior on the per-position inner error class; round 0 has
    # no outer information, so the class prior is uniform.
    o_prior_out = [np.full(tc.n_positions, 0.5) for _ in range(L)]
    diag = TurboDiagnostics(rounds=0)

    inner_results = outer_results = None
    o_code_prior = None
    n_passes = max(config.rounds, 1)
    for rnd in range(n_passes):
        lp = class_priors(o_prior_out)

        def decode_inner(m, pp, npri):
            return decode_sheet(
                in_trellis, s_in[m], code_priors[m], (pp, npri),
                logical_priors=lp[m], boundary="free",
            )

        inner_results = exchange_stage(decode_inner, channel_in_slot)

        # Inner class posteriors -> outer physical (o) priors.
        o_in_prior = [lp[m].reshape(-1)[: tc.n_positions] for m in range(L)]
        o_post = [
            inner_results[m].logical.per_bit[:, :k_in].reshape(-1)[: tc.n_positions]
            for m in range(L)
        ]
        o_ext_in = [extrinsic_bits(o_post[m], o_in_prior[m]) for m in range(L)]
        # Fold the transient channel between the stages (outer-side order).
        o_code_prior = [
            _xor_probs(o_ext_in[m][inv], trans_priors[m][inv]) for m in range(L)
        ]

        def decode_outer(m, pp, npri):
            return decode_sheet(
                out_trellis, s_out[m], o_code_prior[m], (pp, npri),
                boundary="free",
            )

        outer_results = exchange_stage(decode_outer, channel_out_slot)
        diag.rounds = rnd + 1
        diag.history.append(
            [float(np.max(np.abs(r.code - p))) for r, p in zip(outer_results, o_code_prior)]
        )
        if rnd == n_passes - 1:
            break
        # Outer extrinsic feedback, transient channel folded back in.
        o_prior_out = [
            _xor_probs(
                extrinsic_bits(outer_results[m].code, o_code_prior[m]),
                trans_priors[m][inv],
            )
            for m in range(L)
        ]

    # ---- hard decoding ----
    # Final per-sheet min-weight decodes, weighted by the last soft pass's
    # posterior marginals so outer-code information reaches the inner hard
    # decision.  For L >= 2 the neighbouring ancillas are pinned to their
    # globally hardened values; L = 1 decodes its in-sheet ancillas jointly.
    in_hard = _harden_stage(inner_results, L, n_in_slot)
    out_hard = _harden_stage(outer_results, L, n_out_slot)

    for m in range(L):
        anc_corr = np.zeros(anc_priors[m].shape[0], dtype=np.uint8)
        es_out = _final_sheet(
            out_trellis, s_out[m],
            _weights_from_priors(outer_results[m].code),
            out_hard, m, L, tc.n_outer_checks, outer.n,
            _weights_from_priors(outer_results[m].ancilla_prev) if L == 1 else None,
        )
        o_hat_out = es_out[:, : outer.n].reshape(-1)
        es_in = _final_sheet(
            in_trellis, s_in[m],
            _weights_from_priors(inner_results[m].code),
            in_hard, m, L, tc.n_inner_checks, inner.n,
            _weights_from_priors(inner_results[m].ancilla_prev) if L == 1 else None,
        )
        code_corr = es_in[:, : inner.n].reshape(-1)
        correction[fc.code_slice(m)] = code_corr
        if L == 1:
            anc_in = es_in[:, inner.n :].reshape(-1)
            anc_out = es_out[:, outer.n :].reshape(-1)
            anc_corr[: tc.n_inner_checks] = anc_in[: tc.n_inner_checks]
            anc_corr[tc.n_inner_checks :] = anc_out[: tc.n_outer_checks]
        else:
            anc_corr[: tc.n_inner_checks] = in_hard[m][: tc.n_inner_checks]
            anc_corr[tc.n_inner_checks :] = out_hard[m][: tc.n_outer_checks]
        correction[fc.ancilla_slice(m)] = anc_corr
        # Transient corrections absorb the class mismatch between the
        # chosen inner correction and the outer stage's hard decision.
        c_hat = gf2.matmul(tc.encode_rows, code_corr)  # inner-side classes
        o_hat_in = np.asarray(o_hat_out, dtype=np.uint8)[perm]
        correction[tc.transient_slice(m)] = c_hat ^ o_hat_in

    if not np.array_equal(turbo_syndrome(tc, correction), syndrome):
        raise AssertionError("turbo correction does not reproduce the syndrome")
    return correction, diag


def _harden_stage(results, L, n_slot):
    """Hard per-sheet ancilla assignments by averaging the marginal slots."""
    slot_lo = np.full((L, n_slot), np.nan)
    slot_hi = np.full((L, n_slot), np.nan)
    for m in range(L):
        if m - 1 >= 0:
            slot_hi[m - 1] = results[m].ancilla_prev
        if results[m].ancilla_next.size and m + 1 < L:
            slot_lo[m + 1] = results[m].ancilla_next
    if L == 1:
        # In-sheet ancillas: single marginal slot from the sheet itself.
        slot_lo[0] = results[0].ancilla_prev
    with np.errstate(invalid="ignore"):
        avg = np.nanmean(np.stack([slot_lo, slot_hi]), axis=0)
    avg = np.nan_to_num(avg, nan=0.0)
    return (avg > 0.5).astype(np.uint8)


def _final_sheet(trellis, s_sheet, code_weights, hard, m, L, n_real, n_base,
                 anc_weights):
    """Final min-weight sheet decode; returns the (tau, n_sheet) pattern.

    For L >= 2 the virtual ancilla columns are pinned (infinite weight) to
    the hardened values of the neighbouring sheets; for L = 1 the single
    ancilla block is decoded jointly under `anc_weights`.
    """
    tau = trellis.tau
    n_sheet = trellis.seed.n
    pins = np.zeros((tau, n_sheet), dtype=np.uint8)
    w = np.full((tau, n_sheet), np.inf)
    w[:, :n_base] = np.asarray(code_weights, dtype=float).reshape(tau, n_base)
    if L == 1:
        w[:, n_base:] = np.asarray(anc_weights, dtype=float).reshape(tau, -1)
    else:
        n_x = (n_sheet - n_base) // 2
        if m - 1 >= 0:
            pins[:, n_base : n_base + n_x].reshape(-1)[: n_real] = hard[m - 1][: n_real]
        if m + 1 < L:
            pins[:, n_base + n_x :].reshape(-1)[: n_real] = hard[m + 1][: n_real]
    e0 = sheet_pure_error(trellis, s_sheet)
    e0_mod = e0 ^ pins.reshape(-1)
    p, _ = min_weight_path(trellis, e0_mod, w.reshape(-1), boundary="free")
    e = (p ^ e0_mod) ^ pins.reshape(-1)
    return e.reshape(tau, n_sheet)
