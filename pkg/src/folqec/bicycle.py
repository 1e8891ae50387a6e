"""Circulant bicycle codes and Tanner-graph belief propagation decoding.

A bicycle code stacks a circulant block beside its transpose and removes k
rows; the result is a self-dual CSS code on 2m qubits.  Foliated bicycle
codes are decoded on two independent Tanner graphs (primal-sheet checks
and dual-sheet checks) by flooding-schedule sum-product message passing.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from . import gf2
from .codes import CssCode, FoliatedCode, foliate


def circulant(seed_row) -> np.ndarray:
    """Circulant matrix whose row i is the seed row rotated right by i."""
    seed_row = np.asarray(seed_row, dtype=np.uint8)
    m = seed_row.shape[0]
    return np.array([np.roll(seed_row, i) for i in range(m)], dtype=np.uint8)


def random_seed_row(m: int, w: int, rng_seed: int = 0, attempts: int = 200) -> np.ndarray:
    """Random weight-w seed row, screened against short cycles.

    Prefers rows whose cyclic difference multiset has no repeats (no
    length-4 cycles in the circulant's Tanner graph); falls back to the
    least-repeating candidate if none exists.
    """
    if not 0 < w <= m:
        raise ValueError("weight must be in 1..m")
    rng = np.random.default_rng(rng_seed)
    best, best_score = None, None
    for _ in range(attempts):
        support = rng.choice(m, size=w, replace=False)
        diffs = [(a - b) % m for a in support for b in support if a != b]
        score = len(diffs) - len(set(diffs))
        if best_score is None or score < best_score:
            best, best_score = support, score
        if score == 0:
            break
    row = np.zeros(m, dtype=np.uint8)
    row[best] = 1
    return row


def balanced_removed_rows(m: int, k: int, h_full: np.ndarray) -> list[int]:
    """Greedy removal of k rows keeping remaining column weights balanced."""
    if not 0 <= k <= m:
        raise ValueError("cannot remove more rows than exist")
    col_weight = h_full.sum(axis=0).astype(float)
    removed: list[int] = []
    for _ in range(k):
        best, best_var = None, None
        for i in range(m):
            if i in removed:
                continue
            trial = col_weight - h_full[i]
            var = float(np.var(trial))
            if best_var is None or var < best_var:
                best, best_var = i, var
        removed.append(best)
        col_weight -= h_full[best]
    return sorted(removed)


@dataclass
class BicycleCode:
    """A bicycle code: [C | C^T] with rows removed.

    Attributes:
        m: Circulant size (half the qubit count).
        w: Seed row weight.
        removed_rows: Indices of the removed rows of the full stack.
        h: Remaining parity rows, shape (m - k, 2m); used for both X and
            Z stabilisers.
        removed: The removed rows themselves (low-weight logical
            representatives).
    """

    m: int
    w: int
    removed_rows: tuple
    h: np.ndarray
    removed: np.ndarray

    @property
    def n(self) -> int:
        return 2 * self.m

    def to_css(self) -> CssCode:
        """CSS code with logical operators completed from the check kernel."""
        h = self.h
        r = gf2.rank(h)
        k = self.n - 2 * r
        # Z logicals: kernel vectors independent of the row space.
        basis = gf2.kernel_basis(h)
        stack = h.copy()
        lz = []
        for v in basis:
            cand = np.vstack([stack, v])
            if gf2.rank(cand) > gf2.rank(stack):
                stack = cand
                lz.append(v)
            if len(lz) == k:
                break
        lz = np.array(lz, dtype=np.uint8).reshape(k, self.n)
        # X logicals: transform the same block so the pairing is identity.
        gram = gf2.matmul(lz, lz.T)
        inv = np.zeros((k, k), dtype=np.uint8)
        for j in range(k):
            e = np.zeros(k, dtype=np.uint8)
            e[j] = 1
            col = gf2.solve(gram, e)
            if col is None:
                raise AssertionError("degenerate logical pairing")
            inv[:, j] = col
        lx = gf2.matmul(inv.T, lz)
        code = CssCode(
            n=self.n, k=k, sx=h.copy(), sz=h.copy(),
            logical_x=lx, logical_z=lz, name=f"bicycle-{self.m}-{self.w}",
        )
        code.validate()
        return code


def build_bicycle(m: int, seed_row, removed_rows=None, k: int | None = None) -> BicycleCode:
    """Builds a bicycle code from a circulant seed row.

    Args:
        m: Circulant size.
        seed_row: Length-m binary seed row.
        removed_rows: Explicit row indices to remove; if None, `k` rows
            are chosen by the column-weight balancing heuristic.
        k: Number of rows to remove when removed_rows is None.

    Raises:
        ValueError: On malformed inputs.
        AssertionError: If the remaining rows are not self-orthogonal
            (impossible for true circulants).
    """
    seed_row = np.asarray(seed_row, dtype=np.uint8)
    if seed_row.shape[0] != m:
        raise ValueError("seed row length mismatch")
    c = circulant(seed_row)
    h_full = np.hstack([c, c.T])
    if removed_rows is None:
        if k is None:
            raise ValueError("need removed_rows or k")
        removed_rows = balanced_removed_rows(m, k, h_full)
    removed_rows = tuple(sorted(int(i) for i in removed_rows))
    if any(not 0 <= i < m for i in removed_rows):
        raise ValueError("removed row index out of range")
    keep = [i for i in range(m) if i not in removed_rows]
    h = h_full[keep]
    if np.any(gf2.matmul(h, h.T)):
        raise AssertionError("bicycle rows are not self-orthogonal")
    return BicycleCode(
        m=m, w=int(seed_row.sum()), removed_rows=removed_rows,
        h=h, removed=h_full[list(removed_rows)],
    )


def distance_bound(code: BicycleCode, trials: int = 200, rng_seed: int = 0) -> int:
    """Heuristic upper bound on the code distance.

    Randomized search over logical representatives: starts from the
    removed rows (weight 2w) and kernel vectors and greedily adds parity
    rows while the weight drops.  Never a certified distance.
    """
    css = code.to_css()
    rng = np.random.default_rng(rng_seed)
    candidates = [row.copy() for row in code.removed] + [
        row.copy() for row in css.logical_z
    ]
    best = min(int(v.sum()) for v in candidates)
    rows = code.h
    for _ in range(trials):
        v = candidates[rng.integers(0, len(candidates))].copy()
        order = rng.permutation(rows.shape[0])
        for i in order:
            trial = v ^ rows[i]
            if trial.sum() < v.sum():
                v = trial
        best = min(best, int(v.sum()))
    return best


@dataclass
class TannerGraph:
    """Bipartite factor graph over a subset of foliated checks.

    Attributes:
        h: Biadjacency, shape (n_factors, n_vars); column j is variable
            var_ids[j].
        var_ids: Global qubit index of each variable node.
        factor_rows: Global parity-check row index of each factor node.
    """

    h: np.ndarray
    var_ids: np.ndarray
    factor_rows: np.ndarray
    factor_neighbours: list = field(default_factory=list)
    var_neighbours: list = field(default_factory=list)

    def __post_init__(self):
        if not self.factor_neighbours:
            self.factor_neighbours = [np.nonzero(r)[0] for r in self.h]
        if not self.var_neighbours:
            self.var_neighbours = [np.nonzero(c)[0] for c in self.h.T]

    @property
    def n_factors(self) -> int:
        return self.h.shape[0]

    @property
    def n_vars(self) -> int:
        return self.h.shape[1]

    def factor_degree(self, a: int) -> int:
        return len(self.factor_neighbours[a])

    @property
    def n_edges(self) -> int:
        return int(self.h.sum())


def graph_from_checks(checks: np.ndarray, row_ids=None) -> TannerGraph:
    """Tanner graph of an explicit check matrix over its touched columns."""
    checks = np.asarray(checks, dtype=np.uint8)
    cols = np.nonzero(checks.any(axis=0))[0]
    rows = np.arange(checks.shape[0]) if row_ids is None else np.asarray(row_ids)
    return TannerGraph(h=checks[:, cols], var_ids=cols, factor_rows=rows)


def build_foliated_tanner(code: CssCode, L: int) -> tuple[TannerGraph, TannerGraph, FoliatedCode]:
    """Splits a foliated code's checks into primal- and dual-sheet graphs.

    Even (primal) sheet checks act on primal code qubits and dual-sheet
    ancillas, and vice versa, so the two graphs share no variables and
    decode independently.

    Returns:
        (primal graph, dual graph, foliated code); the dual graph is
        empty for L = 1.
    """
    fc = foliate(code, L)
    primal_rows = [i for i, (m, _) in enumerate(fc.sheet_parity) if m % 2 == 0]
    dual_rows = [i for i, (m, _) in enumerate(fc.sheet_parity) if m % 2 == 1]

    def sub(rows):
        if not rows:
            return TannerGraph(
                h=np.zeros((0, 0), dtype=np.uint8),
                var_ids=np.zeros(0, dtype=np.int64),
                factor_rows=np.zeros(0, dtype=np.int64),
            )
        return graph_from_checks(fc.parity_checks[rows], np.asarray(rows))

    return sub(primal_rows), sub(dual_rows), fc


@dataclass
class BpConfig:
    """Flooding-schedule sum-product settings.

    Attributes:
        tol: Fixed-point threshold on the largest message change.
        max_iters: Iteration cap; exceeding it sets converged=False.
        damping: Fraction of the previous message kept (0 = off).
    """

    tol: float = 1e-6
    max_iters: int = 100
    damping: float = 0.0


@dataclass
class BpResult:
    """Belief propagation output.

    Attributes:
        marginals: Per-variable posterior error probability.
        correction: Hard per-variable decision after syndrome repair.
        converged: Messages reached a fixed point within the cap.
        iterations: Iterations performed.
        repaired: Greedy repair had to flip additional bits.
        satisfied: The correction reproduces the factor syndrome.
    """

    marginals: np.ndarray
    correction: np.ndarray
    converged: bool
    iterations: int
    repaired: bool
    satisfied: bool


def check_message_table(incoming: np.ndarray, syndrome_bit: int) -> np.ndarray:
    """Outgoing check-to-variable messages via the parity identity.

    For each neighbour q, the outgoing probability that e_q = 1 is
    (1 - (-1)^s * prod_{q' != q} (1 - 2 p_{q'})) / 2 — the probability
    that the other neighbours' parity fails to match the syndrome bit.
    """
    incoming = np.asarray(incoming, dtype=float)
    t = 1.0 - 2.0 * incoming
    d = t.shape[0]
    # Exclusion products via prefix/suffix to stay exact at p = 1/2.
    pre = np.concatenate([[1.0], np.cumprod(t)[:-1]])
    suf = np.concatenate([np.cumprod(t[::-1])[:-1][::-1], [1.0]])
    excl = pre * suf
    sign = -1.0 if syndrome_bit else 1.0
    return (1.0 - sign * excl) / 2.0


def check_message_direct(incoming: np.ndarray, syndrome_bit: int) -> np.ndarray:
    """Oracle for check_message_table: explicit sum over configurations."""
    incoming = np.asarray(incoming, dtype=float)
    d = incoming.shape[0]
    out = np.zeros(d)
    for q in range(d):
        others = [i for i in range(d) if i != q]
        total = np.zeros(2)
        for conf in range(2 ** len(others)):
            bits = [(conf >> i) & 1 for i in range(len(others))]
            pr = 1.0
            for i, b in zip(others, bits):
                pr *= incoming[i] if b else 1.0 - incoming[i]
            e_q = (sum(bits) + syndrome_bit) % 2
            total[e_q] += pr
        out[q] = total[1] / total.sum()
    return out


def bp_decode(
    graph: TannerGraph, syndrome, priors, config: BpConfig | None = None
) -> BpResult:
    """Sum-product decoding on a Tanner graph with syndrome-bit factors.

    Args:
        graph: Factor graph.
        syndrome: One bit per factor node.
        priors: Per-variable error probability (scalar or length n_vars).

    Returns:
        BpResult; the hard correction is the belief argmax, greedily
        repaired by posterior when it misses the syndrome.
    """
    if config is None:
        config = BpConfig()
    syndrome = np.asarray(syndrome, dtype=np.uint8)
    if syndrome.shape[0] != graph.n_factors:
        raise ValueError("syndrome length mismatch")
    priors = np.asarray(priors, dtype=float)
    if priors.ndim == 0:
        priors = np.full(graph.n_vars, float(priors))
    if priors.shape[0] != graph.n_vars:
        raise ValueError("prior length mismatch")
    if graph.n_vars == 0:
        ok = not np.any(syndrome)
        return BpResult(
            marginals=np.zeros(0), correction=np.zeros(0, dtype=np.uint8),
            converged=True, iterations=0, repaired=False, satisfied=ok,
        )

    H = graph.h.astype(bool)
    # Message arrays indexed (factor, var); only H entries are meaningful.
    m_va = np.where(H, priors[None, :], 0.0)
    m_av = np.zeros_like(m_va)
    iterations = 0
    converged = False
    for iterations in range(1, config.max_iters + 1):
        new_av = np.zeros_like(m_av)
        for a in range(graph.n_factors):
            nb = graph.factor_neighbours[a]
            new_av[a, nb] = check_message_table(m_va[a, nb], int(syndrome[a]))
        if config.damping:
            new_av = (1 - config.damping) * new_av + config.damping * m_av
        new_va = np.zeros_like(m_va)
        for q in range(graph.n_vars):
            nb = graph.var_neighbours[q]
            inc1 = new_av[nb, q]
            # Exclusion products of p and (1-p) across the other factors.
            l1 = np.concatenate([[1.0], np.cumprod(inc1)[:-1]]) * np.concatenate(
                [np.cumprod(inc1[::-1])[:-1][::-1], [1.0]]
            )
            inc0 = 1.0 - inc1
            l0 = np.concatenate([[1.0], np.cumprod(inc0)[:-1]]) * np.concatenate(
                [np.cumprod(inc0[::-1])[:-1][::-1], [1.0]]
            )
            r1 = priors[q] * l1
            r0 = (1.0 - priors[q]) * l0
            total = r0 + r1
            total = np.where(total <= 0.0, 1.0, total)
            new_va[nb, q] = r1 / total
        if config.damping:
            new_va = (1 - config.damping) * new_va + config.damping * m_va
        delta = max(
            float(np.max(np.abs(new_av - m_av))), float(np.max(np.abs(new_va - m_va)))
        )
        m_av, m_va = new_av, new_va
        if delta < config.tol:
            converged = True
            break

    beliefs = np.zeros(graph.n_vars)
    for q in range(graph.n_vars):
        nb = graph.var_neighbours[q]
        r1 = priors[q] * np.prod(m_av[nb, q])
        r0 = (1.0 - priors[q]) * np.prod(1.0 - m_av[nb, q])
        beliefs[q] = r1 / (r0 + r1) if (r0 + r1) > 0 else 0.5
    correction = (beliefs > 0.5).astype(np.uint8)

    residual = gf2.matmul(graph.h, correction) ^ syndrome
    repaired = False
    steps = 0
    while np.any(residual) and steps < 2 * graph.n_vars:
        repaired = True
        a = int(np.nonzero(residual)[0][0])
        nb = graph.factor_neighbours[a]
        # Flip the neighbour the beliefs consider most likely in error,
        # preferring unflipped ones.
        order = nb[np.argsort(-beliefs[nb], kind="stable")]
        cand = [q for q in order if not correction[q]] or list(order)
        q = int(cand[0])
        correction[q] ^= 1
        residual ^= graph.h[:, q]
        steps += 1
    if np.any(residual):
        # The greedy pass can cycle on degenerate syndromes; fall back to
        # a deterministic linear solve of the leftover residual.
        patch = gf2.solve(graph.h, residual)
        if patch is not None:
            repaired = True
            correction ^= patch
            residual = gf2.matmul(graph.h, correction) ^ syndrome
    satisfied = not np.any(residual)
    return BpResult(
        marginals=beliefs, correction=correction, converged=converged,
        iterations=iterations, repaired=repaired, satisfied=satisfied,
    )
