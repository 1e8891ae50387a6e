"""Delay-operator polynomial algebra for convolutional code families.

A polynomial in the delay operator D is stored as a frozen set of integer
exponents with GF(2) coefficients; negative exponents represent the formal
inverse delay (written with a tilde).  Seed matrices of such polynomials
define codes independent of the frame count tau and expand to banded binary
matrices.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import permutations

import numpy as np

from . import gf2


class DelayPoly:
    """GF(2) Laurent polynomial in the delay operator D.

    Attributes:
        exponents: Frozen set of integer exponents with coefficient 1;
            negative entries are inverse-delay (tilde) terms.
    """

    __slots__ = ("exponents",)

    def __init__(self, exponents=()):
        self.exponents = frozenset(int(q) for q in exponents)

    @classmethod
    def zero(cls) -> "DelayPoly":
        return cls()

    @classmethod
    def one(cls) -> "DelayPoly":
        return cls((0,))

    @classmethod
    def d(cls, q: int = 1) -> "DelayPoly":
        """The monomial D^q (inverse delay for q < 0)."""
        return cls((q,))

    @property
    def forward_coeffs(self) -> dict[int, int]:
        """Coefficients of D^q for q >= 0."""
        return {q: 1 for q in sorted(self.exponents) if q >= 0}

    @property
    def dual_coeffs(self) -> dict[int, int]:
        """Coefficients of the inverse-delay terms, keyed by |q|."""
        return {-q: 1 for q in sorted(self.exponents) if q < 0}

    @property
    def degree(self) -> int:
        """Largest forward exponent (0 for the zero polynomial)."""
        return max((q for q in self.exponents if q >= 0), default=0)

    def is_zero(self) -> bool:
        return not self.exponents

    def conj(self) -> "DelayPoly":
        """Formal inverse-delay conjugate: D^q -> D^-q."""
        return DelayPoly(-q for q in self.exponents)

    def shift(self, s: int) -> "DelayPoly":
        return DelayPoly(q + s for q in self.exponents)

    def __add__(self, other: "DelayPoly") -> "DelayPoly":
        return DelayPoly(self.exponents ^ other.exponents)

    def __mul__(self, other: "DelayPoly") -> "DelayPoly":
        return poly_mul(self, other)

    def __eq__(self, other) -> bool:
        return isinstance(other, DelayPoly) and self.exponents == other.exponents

    def __hash__(self) -> int:
        return hash(self.exponents)

    def __repr__(self) -> str:
        if not self.exponents:
            return "0"
        terms = []
        for q in sorted(self.exponents):
            if q == 0:
                terms.append("1")
            elif q == 1:
                terms.append("D")
            elif q > 0:
                terms.append(f"D^{q}")
            else:
                terms.append(f"D~^{-q}")
        return "+".join(terms)


def poly_mul(a: DelayPoly, b: DelayPoly) -> DelayPoly:
    """Product of two delay polynomials.

    Inverse-delay factors resolve against forward factors by exponent
    addition, so D^i * D~^j = D^(i-j).  Products in which both operands
    carry inverse-delay terms never arise in well-formed contexts and are
    rejected.

    Raises:
        ValueError: If both operands contain inverse-delay terms.
    """
    a_neg = any(q < 0 for q in a.exponents)
    b_neg = any(q < 0 for q in b.exponents)
    if a_neg and b_neg:
        raise ValueError("product of two inverse-delay polynomials is undefined")
    acc: set[int] = set()
    for qa in a.exponents:
        for qb in b.exponents:
            acc ^= {qa + qb}
    return DelayPoly(acc)


class DelayMatrix:
    """Matrix of delay polynomials.

    Attributes:
        entries: List of rows, each a list of DelayPoly.
    """

    def __init__(self, entries):
        self.entries = [[p if isinstance(p, DelayPoly) else DelayPoly(p) for p in row] for row in entries]
        widths = {len(row) for row in self.entries}
        if len(widths) > 1:
            raise ValueError("ragged delay matrix")

    @classmethod
    def from_exponents(cls, rows) -> "DelayMatrix":
        """Builds a matrix from nested exponent lists, e.g. [[[0,1,2],[0,2],[0]]]."""
        return cls([[DelayPoly(exps) for exps in row] for row in rows])

    @classmethod
    def zeros(cls, rows: int, cols: int) -> "DelayMatrix":
        return cls([[DelayPoly() for _ in range(cols)] for _ in range(rows)])

    @property
    def rows(self) -> int:
        return len(self.entries)

    @property
    def cols(self) -> int:
        return len(self.entries[0]) if self.entries else 0

    @property
    def max_degree(self) -> int:
        """Memory of the seed: the largest forward exponent over entries."""
        return max((p.degree for row in self.entries for p in row), default=0)

    def row_degree(self, i: int) -> int:
        return max((p.degree for p in self.entries[i]), default=0)

    def to_exponents(self) -> list[list[list[int]]]:
        return [[sorted(p.exponents) for p in row] for row in self.entries]

    def pad_cols(self, left: int, right: int) -> "DelayMatrix":
        """Returns a copy with zero-polynomial columns added on both sides."""
        z = DelayPoly()
        return DelayMatrix(
            [[z] * left + list(row) + [z] * right for row in self.entries]
        )

    def vstack(self, other: "DelayMatrix") -> "DelayMatrix":
        if other.rows and self.rows and other.cols != self.cols:
            raise ValueError("column mismatch")
        return DelayMatrix(self.entries + other.entries)

    def __getitem__(self, ij) -> DelayPoly:
        i, j = ij
        return self.entries[i][j]

    def __eq__(self, other) -> bool:
        return isinstance(other, DelayMatrix) and self.entries == other.entries

    def __repr__(self) -> str:
        body = "; ".join("[" + ", ".join(map(repr, row)) + "]" for row in self.entries)
        return f"DelayMatrix({body})"


@dataclass
class SeedSet:
    """Seed matrices defining one convolutional CSS code family.

    Attributes:
        generator: k x n logical generator seed.
        parity: n_x x n syndrome-forming (X-check) seed.
        isf: n_z x n inverse syndrome former, pairing with `parity`.
        rates: (k, n, n_x, n_z) per-frame counts.
        stabiliser: Z-stabiliser seed used for trellis coset rows; defaults
            to `parity` (self-dual families).
        gauge_z: Optional gauge seed (sheet codes), one row per gauge pair.
        gauge_x: Optional X-side gauge seed pairing with gauge_z.
        name: Optional display name.
    """

    generator: DelayMatrix
    parity: DelayMatrix
    isf: DelayMatrix | None
    rates: tuple[int, int, int, int]
    stabiliser: DelayMatrix | None = None
    gauge_z: DelayMatrix | None = None
    gauge_x: DelayMatrix | None = None
    name: str = ""

    def __post_init__(self):
        k, n, n_x, n_z = self.rates
        if self.generator.rows != k or self.generator.cols != n:
            raise ValueError("generator shape does not match rates")
        if self.parity.rows != n_x or (self.parity.rows and self.parity.cols != n):
            raise ValueError("parity shape does not match rates")
        if self.stabiliser is None:
            self.stabiliser = self.parity

    @property
    def gauge(self) -> DelayMatrix | None:
        return self.gauge_z

    @property
    def k(self) -> int:
        return self.rates[0]

    @property
    def n(self) -> int:
        return self.rates[1]


def expand(seed: DelayMatrix, tau: int, boundary: str = "terminated") -> np.ndarray:
    """Expands a seed matrix into its banded binary matrix over tau frames.

    Row block t holds the seed shifted by t frames; columns are frame-major
    (frame index major, seed column within a frame minor).

    Args:
        seed: Seed matrix of delay polynomials.
        tau: Number of frames; must cover the seed memory.
        boundary: `terminated` drops rows whose support would leave the
            [0, tau) frame range; `open` truncates the support instead.

    Returns:
        uint8 matrix of shape (kept_rows, seed.cols * tau).

    Raises:
        ValueError: If tau is smaller than the seed memory or the boundary
            mode is unknown.
    """
    if boundary not in ("terminated", "open"):
        raise ValueError(f"unknown boundary mode {boundary!r}")
    if tau < seed.max_degree + 1:
        raise ValueError(f"tau={tau} too small for seed memory {seed.max_degree}")
    n = seed.cols
    out_rows = []
    for t in range(tau):
        for i, row in enumerate(seed.entries):
            bits = np.zeros(n * tau, dtype=np.uint8)
            in_range = True
            for j, p in enumerate(row):
                for q in p.exponents:
                    f = t + q
                    if 0 <= f < tau:
                        bits[f * n + j] ^= 1
                    else:
                        in_range = False
            if boundary == "terminated":
                if in_range:
                    out_rows.append(bits)
            else:
                out_rows.append(bits)
    if not out_rows:
        return np.zeros((0, n * tau), dtype=np.uint8)
    return np.array(out_rows, dtype=np.uint8)


def correlate(row_a, row_b) -> dict[int, int]:
    """GF(2) cross-correlation of two polynomial vectors.

    Computes, for every relative frame shift s, the parity of the overlap
    between row_a and row_b delayed by s — the coefficient of D^s in
    row_a * conj(row_b)^T.

    Returns:
        Mapping from shift to bit, containing only nonzero entries.
    """
    acc: set[int] = set()
    for pa, pb in zip(row_a, row_b):
        for qa in pa.exponents:
            for qb in pb.exponents:
                acc ^= {qa - qb}
    return {s: 1 for s in acc}


def block_correlation(a: DelayMatrix, b: DelayMatrix) -> dict[tuple[int, int], dict[int, int]]:
    """Pairwise correlate every row of `a` against every row of `b`."""
    out = {}
    for i in range(a.rows):
        for j in range(b.rows):
            c = correlate(a.entries[i], b.entries[j])
            if c:
                out[(i, j)] = c
    return out


def _is_delta(corr: dict[tuple[int, int], dict[int, int]], rows: int) -> bool:
    """True when the correlation equals the identity at shift zero only."""
    expected = {(i, i): {0: 1} for i in range(rows)}
    return corr == expected


@dataclass
class BlockCheck:
    """One entry of an orthogonality report."""

    name: str
    required: str  # "identity" or "zero" or "unimodular"
    passed: bool
    detail: dict = field(default_factory=dict)


@dataclass
class OrthogonalityReport:
    checks: list[BlockCheck]

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failing(self) -> list[str]:
        return [c.name for c in self.checks if not c.passed]


def _pairing_full_rank(a: DelayMatrix, b: DelayMatrix, tau: int = 12) -> bool:
    """Checks that the a/b correlation pairing has full rank per frame.

    Expands both seeds with open boundaries and tests that the interior
    pairing matrix (rows of a against rows of b, restricted to interior
    frames) has rank a.rows per frame.
    """
    ea = expand(a, tau, "open")
    eb = expand(b, tau, "open")
    m = gf2.matmul(ea, eb.T)
    # Interior row blocks only: away from the boundary by the seed memory.
    pad = max(a.max_degree, b.max_degree) + 1
    keep = slice(pad * a.rows, (tau - pad) * a.rows)
    sub = m[keep]
    return gf2.rank(sub) == sub.shape[0]


def verify_orthogonality(seed: SeedSet) -> OrthogonalityReport:
    """Checks every block orthogonality condition of a seed set.

    The generator must pair to the identity with itself under inverse-delay
    conjugation, the parity/ISF pair must form a delta pairing, and all
    cross blocks must vanish.  Gauge seeds, when present, must commute with
    the generator and parity and pair unimodularly with their X partners.

    Returns:
        OrthogonalityReport listing each block with pass/fail.
    """
    g, h, isf = seed.generator, seed.parity, seed.isf
    checks = []

    def add(name, a, b, required):
        corr = block_correlation(a, b)
        if required == "identity":
            ok = _is_delta(corr, a.rows)
        else:
            ok = not corr
        checks.append(BlockCheck(name, required, ok, {"correlation": corr}))

    add("G.G~T", g, g, "identity")
    add("G.H~T", g, h, "zero")
    add("H.H~T", h, h, "zero")
    if isf is not None:
        add("H.ISF~T", h, isf, "identity")
        add("G.ISF~T", g, isf, "zero")
        add("ISF.ISF~T", isf, isf, "zero")
    if seed.gauge_z is not None:
        jz, jx = seed.gauge_z, seed.gauge_x
        add("JZ.G~T", jz, g, "zero")
        add("JZ.P~T", jz, h, "zero")
        if jx is not None:
            ok = _pairing_full_rank(jz, jx)
            checks.append(BlockCheck("JZ.JX~T", "unimodular", ok))
            if seed.stabiliser is not None:
                add("JX.HZ~T", jx, seed.stabiliser, "zero")
            add("JX.GZ~T", jx, g, "zero")
    return OrthogonalityReport(checks)


def _poly_divmod(a: set[int], b: set[int]) -> tuple[set[int], set[int]]:
    """Division with remainder in GF(2)[D] on exponent sets (forward only)."""
    r = set(a)
    q: set[int] = set()
    db = max(b)
    while r and max(r) >= db:
        s = max(r) - db
        q ^= {s}
        r ^= {e + s for e in b}
    return q, r


def _poly_gcd(a: set[int], b: set[int]) -> set[int]:
    a, b = set(a), set(b)
    while b:
        _, r = _poly_divmod(a, b) if a and max(a) >= max(b) else (set(), a)
        a, b = b, r
    return a


def _determinant(entries: list[list[DelayPoly]]) -> set[int]:
    """Determinant of a small forward-polynomial matrix via Leibniz sum."""
    k = len(entries)
    acc: set[int] = set()
    for perm in permutations(range(k)):
        term = {0}
        for i in range(k):
            p = entries[i][perm[i]]
            if p.is_zero():
                term = set()
                break
            new: set[int] = set()
            for qa in term:
                for qb in p.exponents:
                    new ^= {qa + qb}
            term = new
        acc ^= frozenset(term)
    return acc


def is_noncatastrophic(generator: DelayMatrix) -> bool:
    """Screens a k x n generator seed for non-catastrophicity.

    The gcd over GF(2)[D] of all k x k minor determinants must be a power
    of D (feed-forward invertibility).  Entries must be forward polynomials.
    """
    from itertools import combinations

    k, n = generator.rows, generator.cols
    if any(q < 0 for row in generator.entries for p in row for q in p.exponents):
        raise ValueError("catastrophicity screen expects forward polynomials")
    gcd: set[int] = set()
    for cols in combinations(range(n), k):
        sub = [[generator.entries[i][c] for c in cols] for i in range(k)]
        det = _determinant(sub)
        if det:
            gcd = _poly_gcd(gcd, det) if gcd else det
    if not gcd:
        return False
    return len(gcd) == 1  # monomial D^l


def derive_isf(seed: SeedSet, degree_bound: int | None = None) -> DelayMatrix:
    """Derives an inverse syndrome former for a seed set lacking one.

    Solves, row by row, the banded linear system requiring the candidate to
    correlate as a delta with the matching parity row and vanish against all
    generator rows and the other parity rows, with coefficients restricted
    to exponents [0, degree_bound].  A self-orthogonalisation step then
    cancels ISF/ISF correlations where feasible by adding parity-row
    multiples.

    Raises:
        ValueError: "catastrophic or unsupported seed" when no candidate
            exists within the degree bound.
    """
    g, h = seed.generator, seed.parity
    n = h.cols
    n_z = h.rows
    max_deg = max(g.max_degree, h.max_degree)
    bound = degree_bound if degree_bound is not None else 4 * max(1, max_deg)
    n_var = n * (bound + 1)

    def var(col, q):
        return col * (bound + 1) + q

    # Equations: for each constraint row r and shift s, the correlation
    # coefficient sum_{col,q} x[col,q] * r[col][q-s] has a required value.
    constraint_rows = []
    required = []

    def add_constraints(mat, target_row=None):
        for j in range(mat.rows):
            row = mat.entries[j]
            row_deg = max((q for p in row for q in p.exponents), default=0)
            for s in range(-row_deg, bound + 1):
                eq = np.zeros(n_var, dtype=np.uint8)
                for col in range(n):
                    for qb in row[col].exponents:
                        q = qb + s
                        if 0 <= q <= bound:
                            eq[var(col, q)] ^= 1
                if eq.any() or (target_row == j and s == 0):
                    constraint_rows.append((eq, j, s))

    rows_out = []
    # Build the coefficient matrix once; the RHS changes per ISF row.
    add_constraints(h)
    n_parity_eqs = len(constraint_rows)
    add_constraints(g)
    a_sys = np.array([eq for eq, _, _ in constraint_rows], dtype=np.uint8)
    for i in range(n_z):
        rhs = np.zeros(len(constraint_rows), dtype=np.uint8)
        for idx, (eq, j, s) in enumerate(constraint_rows[:n_parity_eqs]):
            if j == i and s == 0:
                rhs[idx] = 1
        x = gf2.solve(a_sys, rhs)
        if x is None:
            raise ValueError("catastrophic or unsupported seed")
        polys = []
        for col in range(n):
            exps = [q for q in range(bound + 1) if x[var(col, q)]]
            polys.append(DelayPoly(exps))
        rows_out.append(polys)
    isf = DelayMatrix(rows_out)

    # Self-orthogonalisation: add parity-row multiples to cancel ISF/ISF
    # correlations.  With M = ISF.conj(ISF)^T and C its strict lower part
    # (in the Laurent sense for the diagonal), ISF + C.H removes M when the
    # parity block is self-orthogonal.  An odd diagonal at shift zero is a
    # solution-space invariant (all residual freedom has even weight) and
    # means no completion exists.
    for _ in range(2):
        corr = block_correlation(isf, isf)
        if not corr:
            break
        c = DelayMatrix.zeros(n_z, n_z)
        for (i, j), shifts in corr.items():
            if i > j:
                c.entries[i][j] = DelayPoly(shifts.keys())
            elif i == j:
                #

                c.entries[i][i] = DelayPoly(s for s in shifts if s > 0)
        new_rows = []
        for i in range(n_z):
            row = list(isf.entries[i])
            for j in range(n_z):
                cij = c.entries[i][j]
                if not cij.is_zero():
                    for col in range(n):
                        row[col] = row[col] + poly_mul(cij, h.entries[j][col])
            new_rows.append(row)
        isf = DelayMatrix(new_rows)
    if block_correlation(isf, isf):
        raise ValueError("catastrophic or unsupported seed")
    return isf
