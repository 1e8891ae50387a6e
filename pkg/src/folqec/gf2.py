"""Dense binary linear algebra over GF(2).

All matrices are 2-D numpy arrays of dtype uint8 with entries in {0, 1};
vectors are 1-D arrays of the same dtype.  Rows hold stabiliser supports,
syndromes, error patterns and logical supports throughout the package.
"""

from __future__ import annotations

import numpy as np


def as_bits(a) -> np.ndarray:
    """Coerces array-like input to a uint8 array reduced mod 2."""
    arr = np.asarray(a, dtype=np.uint8) % 2
    return arr


def matmul(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Matrix product over GF(2).

    Args:
        a: Left operand, shape (r, m).
        b: Right operand, shape (m, c) or (m,) for a vector.

    Returns:
        The product reduced mod 2, shape (r, c) or (r,).

    Raises:
        ValueError: If the inner dimensions disagree.
    """
    a = np.asarray(a, dtype=np.uint8)
    b = np.asarray(b, dtype=np.uint8)
    inner = b.shape[0]
    if a.shape[-1] != inner:
        raise ValueError(f"incompatible shapes {a.shape} x {b.shape}")
    return (a.astype(np.int64) @ b.astype(np.int64) % 2).astype(np.uint8)


def row_reduce(m: np.ndarray) -> tuple[np.ndarray, int, list[int]]:
    """Row echelon form by Gaussian elimination with lowest-column pivots.

    Args:
        m: Matrix of shape (rows, cols).

    Returns:
        Tuple (reduced, rank, pivots).  `reduced` has the same row space as
        `m`, is in reduced row-echelon form, and its first `rank` rows are
        nonzero; `pivots` lists the pivot column of each nonzero row.
    """
    r = np.array(m, dtype=np.uint8, copy=True) % 2
    if r.ndim != 2:
        raise ValueError("expected a 2-D matrix")
    n_rows, n_cols = r.shape
    pivots: list[int] = []
    row = 0
    for col in range(n_cols):
        if row >= n_rows:
            break
        hits = np.nonzero(r[row:, col])[0]
        if hits.size == 0:
            continue
        pivot = row + hits[0]
        if pivot != row:
            r[[row, pivot]] = r[[pivot, row]]
        # Clear the pivot column everywhere else (reduced echelon form).
        others = np.nonzero(r[:, col])[0]
        others = others[others != row]
        r[others] ^= r[row]
        pivots.append(col)
        row += 1
    return r, row, pivots


def rank(m: np.ndarray) -> int:
    """Rank over GF(2)."""
    return row_reduce(m)[1]


def solve(a: np.ndarray, s: np.ndarray) -> np.ndarray | None:
    """Solves a @ x = s over GF(2).

    Args:
        a: Coefficient matrix, shape (rows, cols).
        s: Right-hand side, shape (rows,).

    Returns:
        A solution vector of shape (cols,), or None when `s` lies outside
        the column space of `a`.  Free variables are set to zero, which
        together with lowest-column pivoting makes the result deterministic.
    """
    a = np.asarray(a, dtype=np.uint8)
    s = np.asarray(s, dtype=np.uint8).reshape(-1)
    if a.shape[0] != s.shape[0]:
        raise ValueError(f"incompatible shapes {a.shape} and {s.shape}")
    aug = np.concatenate([a % 2, (s % 2)[:, None]], axis=1)
    red, rk, pivots = row_reduce(aug)
    n_cols = a.shape[1]
    x = np.zeros(n_cols, dtype=np.uint8)
    for i, col in enumerate(pivots):
        if col == n_cols:
            return None  # pivot in the RHS column: inconsistent system
        x[col] = red[i, n_cols]
    return x


def kernel_basis(a: np.ndarray) -> np.ndarray:
    """Basis of the right null space {x : a @ x = 0} over GF(2).

    Returns:
        Matrix whose rows are basis vectors; shape (cols - rank, cols).
    """
    a = np.asarray(a, dtype=np.uint8)
    n_cols = a.shape[1]
    red, rk, pivots = row_reduce(a)
    pivot_set = set(pivots)
    free = [c for c in range(n_cols) if c not in pivot_set]
    basis = np.zeros((len(free), n_cols), dtype=np.uint8)
    for i, fc in enumerate(free):
        basis[i, fc] = 1
        for row, pc in enumerate(pivots):
            basis[i, pc] = red[row, fc]
    return basis


def in_row_space(rows: np.ndarray, v: np.ndarray) -> bool:
    """Tests whether v lies in the GF(2) row space of `rows`."""
    rows = np.asarray(rows, dtype=np.uint8)
    return solve(rows.T, v) is not None


def orthonormal_complete(rows: np.ndarray, duals: np.ndarray) -> np.ndarray:
    """Completes a partial orthonormal set with a block dual to `duals`.

    Finds Y such that Y @ duals.T = I, Y @ rows.T = 0 and Y @ Y.T = 0,
    which is the missing block of the square orthogonality system
    [rows-partners; duals; Y] once the supplied blocks already satisfy
    their own pairings.

    Args:
        rows: Blocks the result must be orthogonal to (stacked row-wise).
        duals: Blocks the result must pair with as an identity.

    Returns:
        Y of shape (duals.rows, cols).  Empty when `duals` has no rows.

    Raises:
        ValueError: If `duals` rows are not self-orthogonal/orthogonal to
            `rows` (the completion construction needs both), if some pairing
            equation has no solution, or if a row's odd self-overlap cannot
            be repaired (rank deficiency), naming the failing block.
    """
    rows = as_bits(np.atleast_2d(rows))
    duals = as_bits(np.atleast_2d(duals))
    n_cols = duals.shape[1] if duals.size else rows.shape[1]
    n_dual = duals.shape[0]
    if n_dual == 0:
        return np.zeros((0, n_cols), dtype=np.uint8)
    if rows.size and rows.shape[1] != n_cols:
        raise ValueError("rows/duals column mismatch")
    if np.any(matmul(duals, duals.T)):
        raise ValueError("completion infeasible: duals x duals.T != 0")
    if rows.size and np.any(matmul(duals, rows.T)):
        raise ValueError("completion infeasible: duals x rows.T != 0")

    system = np.concatenate([rows, duals], axis=0) if rows.size else duals
    n_fixed = rows.shape[0] if rows.size else 0
    out = np.zeros((n_dual, n_cols), dtype=np.uint8)
    rhs = np.zeros(system.shape[0], dtype=np.uint8)
    for i in range(n_dual):
        rhs[:] = 0
        rhs[n_fixed + i] = 1
        y = solve(system, rhs)
        if y is None:
            raise ValueError(f"completion infeasible: no dual for row {i}")
        out[i] = y

    # Self-overlap parity is linear over GF(2): adding a null-space vector of
    # odd weight flips it, so an odd diagonal entry is repairable iff the
    # null space of the pairing system contains an odd-weight vector.
    diag = np.array([int(out[i] @ out[i]) % 2 for i in range(n_dual)])
    if diag.any():
        null = kernel_basis(system)
        odd = [z for z in null if int(z @ z) % 2 == 1]
        if not odd:
            raise ValueError(
                "completion infeasible: self-orthogonality unrepairable"
            )
        out[diag == 1] ^= odd[0]

    # Off-diagonal repair: with M = Y Y^T (zero diagonal, symmetric) and C
    # its strict lower triangle, Y + C @ duals cancels M without disturbing
    # the pairing or orthogonality constraints.
    m = matmul(out, out.T)
    if np.any(m):
        c = np.tril(m, k=-1)
        out ^= matmul(c, duals)
    assert not np.any(matmul(out, out.T))
    return out
