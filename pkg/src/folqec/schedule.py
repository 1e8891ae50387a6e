"""Cluster construction schedules and single-fault propagation analysis.

A clusterized code is built by c-phase gates between ancilla and code
qubits along the Tanner graph of the Z stabilisers.  A schedule assigns
each gate a time step such that no qubit is addressed twice in one step;
the minimum number of steps equals the largest vertex degree.  An X fault
mid-construction spreads Z onto all partners gated afterwards, and
multiplying by the qubit's cluster stabiliser caps the damage at half the
degree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .codes import (
    CssCode,
    FoliatedCode,
    convolutional_code,
    extract_syndrome,
    foliate,
    is_logical_failure,
)
from .foliated import DecodeConfig, decode_foliated
from .library import CONV_SEEDS, TURBO_SPECS
from .turbo import TurboDecodeConfig, build_turbo, turbo_decode


@dataclass
class Schedule:
    """Time-ordered c-phase gate assignment for a clusterized code.

    Attributes:
        name: Builtin family name or "custom".
        checks: Stabiliser rows being built, shape (n_checks, n); ancilla
            r owns row r.
        gates: Tuples (check row, code qubit, step) with steps in
            1..horizon.
        horizon: Largest step index.
        tau: Frame count of the underlying instance.
    """

    name: str
    checks: np.ndarray
    gates: tuple
    horizon: int
    tau: int = 0

    @property
    def n_checks(self) -> int:
        return self.checks.shape[0]

    @property
    def n_qubits(self) -> int:
        return self.checks.shape[1]

    def ancilla_gates(self, r: int) -> list:
        return [(q, t) for a, q, t in self.gates if a == r]

    def qubit_gates(self, q: int) -> list:
        return [(a, t) for a, qq, t in self.gates if qq == q]


@dataclass
class ScheduleReport:
    """Validity report: qubit collisions and uncovered check support."""

    collisions: list = field(default_factory=list)
    uncovered: list = field(default_factory=list)
    extra: list = field(default_factory=list)

    @property
    def valid(self) -> bool:
        return not (self.collisions or self.uncovered or self.extra)


def validate(s: Schedule) -> ScheduleReport:
    """Checks the one-gate-per-qubit-per-step rule and support coverage."""
    report = ScheduleReport()
    by_step: dict = {}
    for a, q, t in s.gates:
        for key in (("a", a), ("c", q)):
            slot = by_step.setdefault((t, key), [])
            slot.append((a, q))
            if len(slot) == 2:
                report.collisions.append((t, key))
    for r in range(s.n_checks):
        support = set(np.nonzero(s.checks[r])[0].tolist())
        gated = {q for a, q, _ in s.gates if a == r}
        report.uncovered.extend((r, q) for q in sorted(support - gated))
        report.extra.extend((r, q) for q in sorted(gated - support))
    return report


def edge_coloring(checks: np.ndarray) -> list:
    """Assigns steps to all Tanner-graph edges using max-degree colours.

    Bipartite graphs are Delta-edge-colourable; the classic alternating
    path argument realizes it: when the two endpoints of a new edge have
    no common free colour, swapping colours along the maximal two-colour
    path rooted at one endpoint frees one.

    Returns:
        Gate list (check row, qubit, step) with steps 1..Delta.
    """
    checks = np.asarray(checks, dtype=np.uint8)
    delta = int(max(checks.sum(axis=1).max(initial=0), checks.sum(axis=0).max(initial=0)))
    # colour -> partner maps per vertex; None = free.
    left = [dict() for _ in range(checks.shape[0])]
    right = [dict() for _ in range(checks.shape[1])]
    for a, q in zip(*np.nonzero(checks)):
        a, q = int(a), int(q)
        common = next(
            (c for c in range(delta) if c not in left[a] and c not in right[q]),
            None,
        )
        if common is not None:
            left[a][common] = q
            right[q][common] = a
            continue
        alpha = next(c for c in range(delta) if c not in left[a])
        beta = next(c for c in range(delta) if c not in right[q])
        # Walk the maximal alternating alpha/beta path from q (it cannot
        # reach a, else a would have an alpha edge), then swap the two
        # colours along it, freeing alpha at q.
        path = []
        v, on_right, colour = q, True, alpha
        while True:
            table = right[v] if on_right else left[v]
            if colour not in table:
                break
            u = table[colour]
            path.append((v, on_right, u, colour))
            v, on_right = u, not on_right
            colour = beta if colour == alpha else alpha
        for v, on_right, u, colour in path:
            (right if on_right else left)[v].pop(colour)
            (left if on_right else right)[u].pop(colour)
        for v, on_right, u, colour in path:
            other = beta if colour == alpha else alpha
            (right if on_right else left)[v][other] = u
            (left if on_right else right)[u][other] = v
        left[a][alpha] = q
        right[q][alpha] = a
    gates = []
    for a in range(checks.shape[0]):
        for colour, q in left[a].items():
            gates.append((a, q, colour + 1))
    return sorted(gates, key=lambda g: (g[2], g[0]))


def reduce_check_rows(rows: np.ndarray, basis: np.ndarray) -> np.ndarray:
    """Greedy weight reduction of each row by products with basis rows."""
    out = []
    for row in np.asarray(rows, dtype=np.uint8):
        v = row.copy()
        improved = True
        while improved:
            improved = False
            for b in basis:
                t = v ^ b
                if t.sum() < v.sum():
                    v, improved = t, True
            if not improved:
                for b1, b2 in itertools.combinations(basis, 2):
                    t = v ^ b1 ^ b2
                    if t.sum() < v.sum():
                        v, improved = t, True
                        break
        out.append(v)
    return np.array(out, dtype=np.uint8)


# Seed gate orders for the convolutional families as (stream, frame
# offset) per time step; translations across frames build the full code.
C5_SEED_ORDER = (
    (0, 0), (2, 4), (0, 1), (2, 3), (2, 2), (0, 3), (0, 2),
    (1, 0), (1, 3), (2, 5), (2, 0), (1, 2), (1, 5), (0, 4),
)
C3_SEED_ORDER = ((0, 0), (1, 2), (0, 1), (2, 0), (0, 2), (1, 0))

DEFAULT_TAU = {"C3": 8, "C5": 12, "T9": 8, "T25": 12}


def _translated_schedule(name: str, seed_order, code: CssCode, tau: int) -> Schedule:
    n_streams = code.n // tau
    gates = []
    for r in range(code.sz.shape[0]):
        for step, (stream, offset) in enumerate(seed_order, start=1):
            q = n_streams * (r + offset) + stream
            gates.append((r, int(q), step))
    return Schedule(
        name=name, checks=code.sz.copy(), gates=tuple(gates),
        horizon=len(seed_order), tau=tau,
    )


def builtin_schedule(name: str, tau: int | None = None) -> Schedule:
    """Builds a valid construction schedule for a builtin code family.

    Convolutional families use a fixed per-ancilla gate order translated
    across all frames.  Turbo families first reduce the heavy encoded
    outer checks by products with inner checks, then colour the Tanner
    graph edges, which meets the max-degree step count.

    Args:
        name: One of C3, C5, T9, T25.
        tau: Frame count (outer frames for turbo families); defaults to
            the smallest decodable instance per family.
    """
    if name not in DEFAULT_TAU:
        raise ValueError(f"unknown schedule family {name!r}")
    if tau is None:
        tau = DEFAULT_TAU[name]
    if name in CONV_SEEDS:
        code = convolutional_code(CONV_SEEDS[name](), tau)
        order = C3_SEED_ORDER if name == "C3" else C5_SEED_ORDER
        return _translated_schedule(name, order, code, tau)
    tc = build_turbo(TURBO_SPECS[name]("transpose"), tau_out=tau, L=1)
    sz = tc.fc.base.sz
    inner = sz[: tc.n_inner_checks]
    reduced = reduce_check_rows(sz[tc.n_inner_checks :], inner)
    checks = np.vstack([inner, reduced])
    gates = edge_coloring(checks)
    horizon = max(t for _, _, t in gates)
    return Schedule(name=name, checks=checks, gates=tuple(gates), horizon=horizon, tau=tau)


@dataclass
class FaultOutcome:
    """Propagation result of one X fault during construction.

    Attributes:
        kind: "ancilla" (fault on an ancilla, Z spreads to code qubits)
            or "code" (fault on a code qubit, Z spreads to ancillas).
        index: Check row or code qubit index.
        time: Fault time; gates at steps strictly later propagate.
        raw: Partner indices gated after the fault.
        reduced: Minimum-weight equivalent via the qubit's cluster
            stabiliser (the lighter of the later and earlier partner
            sets).
        weight: len(reduced).
    """

    kind: str
    index: int
    time: int
    raw: tuple
    reduced: tuple
    weight: int


def propagate_fault(s: Schedule, kind: str, index: int, time: int) -> FaultOutcome:
    """Propagates a single X fault at the given construction time.

    An X fault commutes through earlier gates but each later c-phase gate
    copies a Z onto the partner.  Multiplying by the faulted qubit's
    cluster stabiliser (X there, Z on every partner) trades the later
    partner set for the earlier one, so the reduced pattern is whichever
    of the two is lighter.
    """
    if kind == "ancilla":
        if not 0 <= index < s.n_checks:
            raise ValueError("unknown ancilla")
        pairs = s.ancilla_gates(index)
    elif kind == "code":
        if not 0 <= index < s.n_qubits:
            raise ValueError("unknown qubit")
        pairs = s.qubit_gates(index)
        if not pairs:
            raise ValueError("qubit participates in no gate")
    else:
        raise ValueError("kind must be 'ancilla' or 'code'")
    later = tuple(sorted(p for p, t in pairs if t > time))
    earlier = tuple(sorted(p for p, t in pairs if t <= time))
    reduced = later if len(later) <= len(earlier) else earlier
    return FaultOutcome(
        kind=kind, index=index, time=time,
        raw=later, reduced=reduced, weight=len(reduced),
    )


@dataclass
class FaultReport:
    """Exhaustive single-fault sweep outcome.

    Attributes:
        n_faults: (qubit, time) pairs swept.
        n_decoded: Distinct nontrivial reduced patterns decoded.
        failures: Faults whose reduced pattern was not corrected.
        max_weight: Largest reduced pattern weight observed.
    """

    n_faults: int = 0
    n_decoded: int = 0
    failures: list = field(default_factory=list)
    max_weight: int = 0

    @property
    def passed(self) -> bool:
        return not self.failures


def _conv_context(name: str, tau: int, sheets: int):
    seed = CONV_SEEDS[name]()
    fc = foliate(convolutional_code(seed, tau), sheets)
    basis_change = np.eye(fc.parity_checks.shape[0], dtype=np.uint8)

    def decode(s_std, priors):
        corr, _ = decode_foliated(fc, s_std, priors, DecodeConfig(seed=seed))
        return corr

    return fc, basis_change, decode


def _turbo_context(name: str, tau: int, sheets: int):
    tc = build_turbo(TURBO_SPECS[name]("transpose"), tau_out=tau, L=sheets)
    sz = tc.fc.base.sz
    inner = sz[: tc.n_inner_checks]
    reduced = reduce_check_rows(sz[tc.n_inner_checks :], inner)
    checks = np.vstack([inner, reduced])
    base = tc.fc.base
    composite = CssCode(
        n=base.n, k=base.k, sx=checks.copy(), sz=checks.copy(),
        logical_x=base.logical_x.copy(), logical_z=base.logical_z.copy(),
        name=base.name + "-reduced",
    )
    composite.validate()
    fc_red = foliate(composite, sheets)
    # Basis change R with scheduled rows = R @ standard rows; R is its own
    # inverse because only inner rows are mixed into outer ones.  The same
    # per-sheet block repeats for every sheet of the instance.
    n_checks = checks.shape[0]
    r_sheet = np.eye(n_checks, dtype=np.uint8)
    for i in range(tc.n_inner_checks, n_checks):
        combo = gf2.solve(sz.T, checks[i])
        r_sheet[i] = combo
    assert np.array_equal(gf2.matmul(r_sheet, sz), checks)
    n_rows = fc_red.parity_checks.shape[0]
    r_mat = np.eye(n_rows, dtype=np.uint8)
    for m in range(sheets):
        rows = np.array(fc_red.check_rows(m))
        for i in range(n_checks):
            full = np.zeros(n_rows, dtype=np.uint8)
            full[rows[np.nonzero(r_sheet[i])[0]]] = 1
            r_mat[rows[i]] = full

    def decode(s_std, priors):
        cfg = TurboDecodeConfig(rounds=2, exchange_iters=1)
        corr, _ = turbo_decode(tc, s_std, priors, cfg)
        return tc.cluster_image(corr)

    return fc_red, r_mat, decode


def schedule_context(name: str, tau: int, sheets: int = 1):
    """(foliated instance, check-basis change, decoder) for fault checks."""
    if name in CONV_SEEDS:
        return _conv_context(name, tau, sheets)
    if name in TURBO_SPECS:
        return _turbo_context(name, tau, sheets)
    raise ValueError(f"unknown schedule family {name!r}")


def _fault_error_vector(
    fc: FoliatedCode, outcome: FaultOutcome, sheet: int
) -> np.ndarray:
    # On a single sheet the reduced pattern is stabiliser-equivalent to
    # the raw one; with neighbouring sheets the code qubit's cluster
    # stabiliser also touches them, so the raw later-partner set is the
    # physical error.
    pattern = outcome.reduced if fc.sheets == 1 else outcome.raw
    e = np.zeros(fc.n_qubits, dtype=np.uint8)
    if outcome.kind == "ancilla":
        base = fc.code_slice(sheet).start
        for q in pattern:
            e[base + q] ^= 1
    else:
        base = fc.ancilla_slice(sheet).start
        for r in pattern:
            e[base + r] ^= 1
    return e


def _rebase_ancillas(fc: FoliatedCode, corr: np.ndarray, s_target: np.ndarray) -> np.ndarray:
    """Replaces the ancilla part of corr so its syndrome equals s_target.

    The code part is kept; ancilla flips are re-solved in fc's own check
    basis.  On one sheet each ancilla sits in exactly its own check; with
    more sheets the sheet-m ancillas appear in the rows of sheets m-1 and
    m+1, which makes the system triangular sheet by sheet.
    """
    out = corr.copy()
    for m in range(fc.sheets):
        out[fc.ancilla_slice(m)] = 0
    if fc.sheets == 1:
        out[fc.ancilla_slice(0)] ^= extract_syndrome(fc, out) ^ s_target
        return out
    for m in range(fc.sheets - 1):
        gap = extract_syndrome(fc, out) ^ s_target
        rows = fc.check_rows(m)
        nxt = fc.ancilla_slice(m + 1).start
        for j, r in enumerate(rows):
            if gap[r]:
                out[nxt + j] ^= 1
    return out


def check_all_single_faults(
    s: Schedule, priors: float = 0.01, context=None, sheets: int = 1
) -> FaultReport:
    """Injects every single-fault pattern during construction and decodes it.

    For each qubit and each time between construction steps the
    propagated Z pattern lands on one sheet of an L-sheet instance (the
    middle one, so a thick stack bounds the fault from both sides); the
    decode runs in the standard check basis (syndromes mapped through the
    basis change) and the fault is a failure when the residual flips the
    logical readout.

    Args:
        s: A builtin or custom schedule over the instance's checks.
        priors: Channel probability handed to the decoder.
        context: Optional (foliated code, basis change, decode) triple;
            built from s.name, s.tau and sheets when omitted.
        sheets: Number of sheets of the decoded instance (ignored when an
            explicit context is given).
    """
    if context is None:
        context = schedule_context(s.name, s.tau, sheets)
    fc, r_mat, decode = context
    mid = fc.sheets // 2
    report = FaultReport()
    seen: dict = {}
    sweep = [("ancilla", r) for r in range(s.n_checks)] + [
        ("code", q) for q in range(s.n_qubits) if s.qubit_gates(q)
    ]
    for kind, index in sweep:
        for time in range(s.horizon + 1):
            outcome = propagate_fault(s, kind, index, time)
            report.n_faults += 1
            report.max_weight = max(report.max_weight, outcome.weight)
            pattern = outcome.reduced if fc.sheets == 1 else outcome.raw
            if not pattern:
                continue
            key = (kind, pattern)
            if key in seen:
                failed = seen[key]
            else:
                e = _fault_error_vector(fc, outcome, mid)
                s_sched = extract_syndrome(fc, e)
                # R mixes inner rows into outer rows only, so it is its
                # own inverse over GF(2).
                s_std = gf2.matmul(r_mat, s_sched)
                corr = decode(s_std, priors)
                corr_sched = _rebase_ancillas(fc, corr, s_sched)
                residual = e ^ corr_sched
                assert not np.any(extract_syndrome(fc, residual))
                failed = bool(is_logical_failure(fc, residual)[0])
                seen[key] = failed
                report.n_decoded += 1
            if failed:
                report.failures.append((kind, index, time))
    return report


def export_schedule(s: Schedule) -> str:
    """Plain-text gate list, one `a_<r> c_<q> T<m>` line per gate."""
    lines = [f"a_{a} c_{q} T{t}" for a, q, t in s.gates]
    return "\n".join(lines) + "\n"


def import_schedule(text: str, checks: np.ndarray, name: str = "custom") -> Schedule:
    """Parses a gate list exported by export_schedule."""
    gates = []
    for line in text.strip().splitlines():
        a_part, c_part, t_part = line.split()
        gates.append(
            (int(a_part[2:]), int(c_part[2:]), int(t_part[1:]))
        )
    horizon = max((t for _, _, t in gates), default=0)
    return Schedule(
        name=name, checks=np.asarray(checks, dtype=np.uint8),
        gates=tuple(gates), horizon=horizon,
    )
