"""Arithmetic on the truncated Walsh group and step-function integration.

A function on G (or G x G) is stored as a numpy array of its values on the
cells of the level-N dyadic partition.  Cell ``c`` is the point whose
coordinate ``x_i`` is bit ``i`` of ``c`` (least significant bit first), so
group addition is XOR and ``I_n(x)`` is the set of cells sharing the low
``n`` bits of ``x``.
"""

from typing import NamedTuple

import numpy as np

__all__ = [
    "DyadicPoint",
    "resolution",
    "group_add",
    "interval_cells",
    "integrate",
    "lp_quasinorm",
    "weak_lp_quasinorm",
    "refine",
    "coarsen",
]


class DyadicPoint(NamedTuple):
    cell: int
    N: int

    def __add__(self, other):
        return group_add(self, other)


def resolution(values) -> int:
    """Return N for a grid of shape (2^N,) or (2^N, 2^N)."""
    values = np.asarray(values)
    if values.ndim not in (1, 2):
        raise ValueError(f"grids are 1D or 2D, got ndim={values.ndim}")
    n = values.shape[0]
    if values.ndim == 2 and values.shape[1] != n:
        raise ValueError(f"2D grids must be square, got {values.shape}")
    if n < 1 or n & (n - 1):
        raise ValueError(f"grid side must be a power of two, got {n}")
    return n.bit_length() - 1


def group_add(a: DyadicPoint, b: DyadicPoint) -> DyadicPoint:
    if a.N != b.N:
        raise ValueError(f"resolution mismatch: {a.N} != {b.N}")
    for pt in (a, b):
        if not 0 <= pt.cell < 1 << pt.N:
            raise ValueError(f"cell {pt.cell} out of range at N={pt.N}")
    return DyadicPoint(a.cell ^ b.cell, a.N)


def interval_cells(level: int, base: DyadicPoint) -> np.ndarray:
    """Cells of ``I_level(base)``: those agreeing with base on x_0..x_{level-1}."""
    if not 0 <= level <= base.N:
        raise ValueError(f"level {level} outside [0, {base.N}]")
    low = base.cell & ((1 << level) - 1)
    return np.arange(low, 1 << base.N, 1 << level)


def integrate(f) -> float:
    # every cell has the same measure, so the integral is the mean
    f = np.asarray(f, dtype=float)
    resolution(f)
    return float(f.sum() / f.size)


def _check_p(p):
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")


def lp_quasinorm(f, p: float) -> float:
    _check_p(p)
    f = np.abs(np.asarray(f, dtype=float))
    resolution(f)
    if p == 1:
        return float(f.sum() / f.size)
    return float((np.power(f, p).sum() / f.size) ** (1.0 / p))


def weak_lp_quasinorm(f, p: float) -> float:
    """sup_t t * mu(|f| > t)^(1/p) for a step function.

    With |values| sorted decreasingly as v_1 >= v_2 >= ..., the supremum is
    max_k v_k (k m)^(1/p), m the cell measure, approached as t increases to v_k.
    """
    _check_p(p)
    f = np.asarray(f, dtype=float)
    resolution(f)
    v = np.sort(np.abs(f), axis=None)[::-1]
    k = np.arange(1, v.size + 1, dtype=float)
    return float(np.max(v * (k / v.size) ** (1.0 / p)))


def refine(f, levels: int = 1) -> np.ndarray:
    """Re-express a level-N grid at level N + levels (cells are duplicated).

    New cells differ from old ones in the high coordinates only, so the
    array is tiled along each axis.
    """
    f = np.asarray(f)
    resolution(f)
    reps = 1 << levels
    return np.tile(f, (reps,) * f.ndim)


def coarsen(f, level: int) -> np.ndarray:
    """Average a grid down to its level-``level`` cells (the inverse of refine)."""
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if not 0 <= level <= N:
        raise ValueError(f"level {level} outside [0, {N}]")
    k = 1 << level
    if f.ndim == 1:
        return f.reshape(-1, k).mean(axis=0)
    return f.reshape(-1, k, f.shape[1] // k, k).mean(axis=(0, 2))
