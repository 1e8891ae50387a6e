"""CSS codes, clusterization, and foliation into sheet stacks.

A foliated code is represented by its cluster graph: sheets of clusterized
CSS codes (one ancilla per Z stabiliser, bonds along the Tanner graph),
alternating primal/dual, with inter-sheet bonds between corresponding code
qubits.  Z patterns that act trivially on the post-measurement state are
sums of graph neighbourhoods of measured qubits, and logical readout
supports are solved from the same graph, which grounds both the syndrome
map and the logical-failure test.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .delay import SeedSet, expand


@dataclass
class CssCode:
    """A CSS stabiliser code given by binary support matrices.

    Attributes:
        n: Physical qubit count.
        k: Logical qubit count.
        sx: X-stabiliser supports, shape (n_x, n).
        sz: Z-stabiliser supports, shape (n_z, n).
        logical_x: X logical supports, shape (k, n).
        logical_z: Z logical supports, shape (k, n).
    """

    n: int
    k: int
    sx: np.ndarray
    sz: np.ndarray
    logical_x: np.ndarray
    logical_z: np.ndarray
    name: str = ""

    def validate(self) -> None:
        """Checks commutation invariants; raises ValueError on violation."""
        for mat, label in [
            (self.sx, "sx"), (self.sz, "sz"),
            (self.logical_x, "logical_x"), (self.logical_z, "logical_z"),
        ]:
            if mat.shape[1] != self.n:
                raise ValueError(f"{label} has wrong width")
        if self.sx.size and self.sz.size and np.any(gf2.matmul(self.sx, self.sz.T)):
            raise ValueError("sx and sz rows do not commute")
        if self.logical_x.size and self.sz.size and np.any(
            gf2.matmul(self.logical_x, self.sz.T)
        ):
            raise ValueError("logical_x does not commute with sz")
        if self.logical_z.size and self.sx.size and np.any(
            gf2.matmul(self.logical_z, self.sx.T)
        ):
            raise ValueError("logical_z does not commute with sx")

    @property
    def n_ancilla(self) -> int:
        """Ancilla count of the clusterized code: one per Z stabiliser."""
        return self.sz.shape[0]


@dataclass
class ClusterGraph:
    """Bipartite progenitor cluster: code qubits vs Z-stabiliser ancillas."""

    n_code: int
    bonds: np.ndarray  # shape (n_ancilla, n_code); row a = support of S_Z row a

    @property
    def n_ancilla(self) -> int:
        return self.bonds.shape[0]

    def ancilla_degree(self, a: int) -> int:
        return int(self.bonds[a].sum())

    def neighbours(self, a: int) -> np.ndarray:
        return np.nonzero(self.bonds[a])[0]


def clusterize(code: CssCode) -> ClusterGraph:
    """Builds the Tanner graph of S_Z: one ancilla vertex per Z stabiliser."""
    code.validate()
    return ClusterGraph(n_code=code.n, bonds=code.sz.copy())


def dualize(code: CssCode) -> CssCode:
    """Exchanges X- and Z-type stabilisers and logicals."""
    return CssCode(
        n=code.n, k=code.k,
        sx=code.sz.copy(), sz=code.sx.copy(),
        logical_x=code.logical_z.copy(), logical_z=code.logical_x.copy(),
        name=code.name,
    )


def convolutional_code(seed: SeedSet, tau: int, boundary: str = "terminated") -> CssCode:
    """Expands a convolutional seed family into a finite CSS code.

    Terminated boundaries drop generator and stabiliser rows whose support
    would leave the frame range, so the logical count is tau minus the
    generator memory (times k).
    """
    gx = expand(seed.generator, tau, boundary)
    hx = expand(seed.parity, tau, boundary)
    hz = expand(seed.stabiliser, tau, boundary)
    code = CssCode(
        n=seed.n * tau, k=gx.shape[0],
        sx=hx, sz=hz,
        logical_x=gx, logical_z=gx.copy(),
        name=seed.name or "conv",
    )
    code.validate()
    return code


@dataclass
class FoliatedCode:
    """A stack of L alternating primal/dual clusterized code sheets.

    Qubit indexing is sheet-major; within a sheet, code qubits precede
    ancillas.  `parity_checks` rows are the foliated X-checks; for L >= 2
    the check centred on sheet m pairs the stabiliser support on sheet m
    with the matching ancillas of sheets m-1 and m+1, while L = 1 pairs it
    with the in-sheet ancilla (faulty-syndrome model).
    """

    base: CssCode
    sheets: int
    sheet_codes: list[CssCode]
    sheet_offsets: list[int]
    n_qubits: int
    parity_checks: np.ndarray
    sheet_parity: list[tuple[int, int]]
    adjacency: np.ndarray
    measured: np.ndarray
    readout: np.ndarray = field(default=None)

    @property
    def k(self) -> int:
        return self.base.k

    def code_slice(self, m: int) -> slice:
        off = self.sheet_offsets[m]
        return slice(off, off + self.sheet_codes[m].n)

    def ancilla_slice(self, m: int) -> slice:
        off = self.sheet_offsets[m] + self.sheet_codes[m].n
        n_anc = self.sheet_codes[m].n_ancilla
        return slice(off, off + n_anc)

    def check_rows(self, m: int) -> list[int]:
        return [i for i, (mm, _) in enumerate(self.sheet_parity) if mm == m]

    def trivial_rows(self) -> np.ndarray:
        """Generators of the trivially-acting Z patterns."""
        return self.adjacency[self.measured]


def foliate(code: CssCode, L: int) -> FoliatedCode:
    """Foliates a CSS code into L sheets with Eq.-style parity checks.

    Args:
        code: Base (primal) CSS code; sheets alternate with its dual.
        L: Total number of sheets (>= 1).

    Returns:
        FoliatedCode with parity checks, cluster adjacency, measurement
        mask and solved logical readout supports.

    Raises:
        ValueError: If L < 1, or L == 1 for a code whose sx/sz rows do not
            coincide (the single-sheet model needs one ancilla per X check).
    """
    if L < 1:
        raise ValueError("L must be >= 1")
    code.validate()
    sheet_codes = [code if m % 2 == 0 else dualize(code) for m in range(L)]
    if L == 1 and not np.array_equal(code.sx, code.sz):
        raise ValueError("single-sheet foliation requires matching sx/sz rows")

    sheet_offsets = []
    off = 0
    for sc in sheet_codes:
        sheet_offsets.append(off)
        off += sc.n + sc.n_ancilla
    n_qubits = off

    fc = FoliatedCode(
        base=code, sheets=L, sheet_codes=sheet_codes,
        sheet_offsets=sheet_offsets, n_qubits=n_qubits,
        parity_checks=None, sheet_parity=[],
        adjacency=np.zeros((n_qubits, n_qubits), dtype=np.uint8),
        measured=np.ones(n_qubits, dtype=bool),
    )

    adj = fc.adjacency
    for m, sc in enumerate(sheet_codes):
        c0 = sheet_offsets[m]
        a0 = c0 + sc.n
        for j in range(sc.n_ancilla):
            for q in np.nonzero(sc.sz[j])[0]:
                adj[a0 + j, c0 + q] = 1
                adj[c0 + q, a0 + j] = 1
        if m + 1 < L:
            c1 = sheet_offsets[m + 1]
            for q in range(sc.n):
                adj[c0 + q, c1 + q] = 1
                adj[c1 + q, c0 + q] = 1

    checks = []
    for m, sc in enumerate(sheet_codes):
        c0 = sheet_offsets[m]
        for h in range(sc.sx.shape[0]):
            row = np.zeros(n_qubits, dtype=np.uint8)
            row[c0 : c0 + sc.n] = sc.sx[h]
            if L == 1:
                row[fc.ancilla_slice(m).start + h] = 1
            else:
                for mm in (m - 1, m + 1):
                    if 0 <= mm < L:
                        anc = fc.ancilla_slice(mm).start
                        if h >= sheet_codes[mm].n_ancilla:
                            raise ValueError("sheet ancilla mismatch")
                        row[anc + h] = 1
            checks.append(row)
            fc.sheet_parity.append((m, h))
    fc.parity_checks = (
        np.array(checks, dtype=np.uint8)
        if checks
        else np.zeros((0, n_qubits), dtype=np.uint8)
    )

    for m in (0, L - 1):
        cs = fc.code_slice(m)
        fc.measured[cs] = False

    fc.readout = _solve_readout(fc)
    return fc


def _solve_readout(fc: FoliatedCode) -> np.ndarray:
    """Solves the end-to-end logical readout supports.

    For each logical j, finds an X-measurement set A containing the first
    sheet's logical X support whose cluster-stabiliser product leaves a Z
    residue only on the end sheets, where it must equal the end-sheet
    logical Z target (nonzero on the last sheet when the sheet count is
    even) up to end-sheet Z stabilisers.  With an odd sheet count the last
    sheet's logical X support joins A instead and the Z target vanishes.
    """
    k = fc.base.k
    L = fc.sheets
    out = np.zeros((k, fc.n_qubits), dtype=np.uint8)
    adj = fc.adjacency
    meas_cols = np.nonzero(fc.measured)[0]
    # Extra degrees of freedom: Z-stabiliser dressing on each end sheet.
    dress_cols = []
    for m in {0, L - 1}:
        sc = fc.sheet_codes[m]
        cs = fc.code_slice(m)
        for row in sc.sz:
            col = np.zeros(fc.n_qubits, dtype=np.uint8)
            col[cs] = row
            dress_cols.append(col)
    dress = (
        np.array(dress_cols, dtype=np.uint8).T
        if dress_cols
        else np.zeros((fc.n_qubits, 0), dtype=np.uint8)
    )
    system = np.concatenate([adj[:, meas_cols], dress], axis=1)
    n_meas = meas_cols.shape[0]
    for j in range(k):
        a_u = np.zeros(fc.n_qubits, dtype=np.uint8)
        a_u[fc.code_slice(0)] = fc.sheet_codes[0].logical_x[j]
        target = np.zeros(fc.n_qubits, dtype=np.uint8)
        if L % 2 == 1 and L > 1:
            a_u[fc.code_slice(L - 1)] = fc.sheet_codes[L - 1].logical_x[j]
        elif L % 2 == 0:
            target[fc.code_slice(L - 1)] = fc.sheet_codes[L - 1].logical_z[j]
        rhs = gf2.matmul(adj, a_u) ^ target
        y = gf2.solve(system, rhs)
        if y is None:
            raise ValueError(f"no logical readout support for logical {j}")
        w = a_u.copy()
        w[meas_cols] ^= y[:n_meas]
        out[j] = w
    return out


def extract_syndrome(fc: FoliatedCode, err: np.ndarray) -> np.ndarray:
    """Syndrome S = P @ err over GF(2)."""
    err = np.asarray(err, dtype=np.uint8)
    if err.shape[0] != fc.n_qubits:
        raise ValueError("error pattern length mismatch")
    return gf2.matmul(fc.parity_checks, err)


def pure_error(fc: FoliatedCode, s: np.ndarray, isf: np.ndarray | None = None) -> np.ndarray:
    """A pattern reproducing syndrome `s`.

    Args:
        fc: Foliated code.
        s: Syndrome vector over parity checks.
        isf: Optional pseudo-inverse with P @ isf.T = I; when supplied the
            pure error is isf.T @ s, otherwise a deterministic linear solve
            is used.

    Raises:
        ValueError: If the pseudo-inverse identity fails or the syndrome is
            inconsistent.
    """
    s = np.asarray(s, dtype=np.uint8)
    if isf is not None:
        e0 = gf2.matmul(isf.T, s)
    else:
        e0 = gf2.solve(fc.parity_checks, s)
        if e0 is None:
            raise ValueError("syndrome outside the check image")
    if not np.array_equal(extract_syndrome(fc, e0), s):
        raise ValueError("pure error does not reproduce the syndrome")
    return e0


def is_logical_failure(fc: FoliatedCode, residual: np.ndarray) -> tuple[bool, int]:
    """Evaluates the residual against the logical readout correlators.

    Args:
        residual: Error plus correction, over all cluster qubits.

    Returns:
        (word_fail, bit_failures): whether any logical readout flips, and
        how many do.
    """
    eps = gf2.matmul(fc.readout, np.asarray(residual, dtype=np.uint8))
    bit_failures = int(eps.sum())
    return bit_failures > 0, bit_failures


def in_trivial_space(fc: FoliatedCode, pattern: np.ndarray) -> bool:
    """Tests whether a Z pattern acts trivially on the measured cluster."""
    rows = fc.trivial_rows()
    return gf2.solve(rows.T, np.asarray(pattern, dtype=np.uint8)) is not None
