"""Builtin code definitions: block codes and convolutional seed families."""

from __future__ import annotations

import numpy as np

from .codes import CssCode
from .delay import DelayMatrix, SeedSet


def steane() -> CssCode:
    """Self-dual 7-qubit code with weight-4 stabilisers."""
    h = np.array(
        [
            [1, 1, 0, 0, 0, 1, 1],
            [0, 1, 1, 1, 0, 0, 1],
            [0, 0, 0, 1, 1, 1, 1],
        ],
        dtype=np.uint8,
    )
    logical = np.array([[1, 1, 1, 0, 0, 0, 0]], dtype=np.uint8)
    return CssCode(
        n=7, k=1, sx=h.copy(), sz=h.copy(),
        logical_x=logical.copy(), logical_z=logical.copy(), name="steane",
    )


def shor() -> CssCode:
    """9-qubit code: weight-2 Z stabilisers, weight-6 X stabilisers."""
    sz = np.zeros((6, 9), dtype=np.uint8)
    for i, (a, b) in enumerate([(0, 1), (1, 2), (3, 4), (4, 5), (6, 7), (7, 8)]):
        sz[i, a] = sz[i, b] = 1
    sx = np.zeros((2, 9), dtype=np.uint8)
    sx[0, 0:6] = 1
    sx[1, 3:9] = 1
    lx = np.zeros((1, 9), dtype=np.uint8)
    lx[0, 0:3] = 1
    lz = np.zeros((1, 9), dtype=np.uint8)
    lz[0, [0, 3, 6]] = 1
    return CssCode(n=9, k=1, sx=sx, sz=sz, logical_x=lx, logical_z=lz, name="shor")


def c3_seed() -> SeedSet:
    """Rate-1/3 self-dual convolutional code, memory (1, 2)."""
    return SeedSet(
        generator=DelayMatrix.from_exponents([[[1], [1], [0]]]),
        parity=DelayMatrix.from_exponents([[[0, 1, 2], [0, 2], [0]]]),
        isf=DelayMatrix.from_exponents([[[1], [1], []]]),
        rates=(1, 3, 1, 1),
        name="C3",
    )


def c5_seed() -> SeedSet:
    """Rate-1/3 self-dual convolutional code with weight-14 stabilisers.

    The generator (weight 7) and syndrome pseudo-inverse are minimal-degree
    completions of the published parity seed, verified by the orthogonality
    report in tests.
    """
    return SeedSet(
        generator=DelayMatrix.from_exponents([[[2], [0, 2, 3], [0, 1, 3]]]),
        parity=DelayMatrix.from_exponents(
            [[[0, 1, 2, 3, 4], [0, 2, 3, 5], [0, 2, 3, 4, 5]]]
        ),
        isf=DelayMatrix.from_exponents([[[1, 2, 3], [1, 2, 4], [1, 2, 3, 4]]]),
        rates=(1, 3, 1, 1),
        name="C5",
    )


CONV_SEEDS = {"C3": c3_seed, "C5": c5_seed}


def t9_spec(interleaver_kind: str = "random", rng_seed: int = 0):
    """Rate-1/16 distance-9 turbo code: two copies of the C3 family."""
    from .turbo import TurboCodeSpec

    return TurboCodeSpec(
        inner=c3_seed(), outer=c3_seed(),
        interleaver_kind=interleaver_kind, rng_seed=rng_seed,
        name="T9", distance=9,
    )


def t25_spec(interleaver_kind: str = "random", rng_seed: int = 0):
    """Rate-1/16 distance-25 turbo code: two copies of the C5 family."""
    from .turbo import TurboCodeSpec

    return TurboCodeSpec(
        inner=c5_seed(), outer=c5_seed(),
        interleaver_kind=interleaver_kind, rng_seed=rng_seed,
        name="T25", distance=25,
    )


TURBO_SPECS = {"T9": t9_spec, "T25": t25_spec}
