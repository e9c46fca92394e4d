"""Walsh-Paley functions, Dirichlet kernels, fast Walsh-Hadamard transforms
and the rectangular/quadratical partial-sum operators.

Paley ordering throughout: ``w_n(c) = (-1)^popcount(n & c)``, which is the
natural (Hadamard) ordering of the radix-2 butterfly under the LSB cell
convention of :mod:`walsh_hp.dyadic`.
"""

from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .dyadic import lp_quasinorm, resolution, weak_lp_quasinorm

__all__ = [
    "top_bit",
    "walsh_function",
    "walsh_matrix",
    "dirichlet_kernel",
    "butterfly",
    "fwht",
    "effective_level",
    "partial_sum_1d",
    "partial_sum_rect",
    "marginal_partial_sum",
    "quad_partial_sum",
    "quad_sweep",
]


def top_bit(n: int) -> int:
    """|n| = max{j : n_j != 0}, for n >= 1."""
    if n < 1:
        raise ValueError("|n| is defined for n >= 1")
    return n.bit_length() - 1


def _popcount_parity(a):
    a = np.asarray(a, dtype=np.int64).copy()
    parity = np.zeros_like(a)
    while np.any(a):
        parity ^= a & 1
        a >>= 1
    return parity


def walsh_function(n: int, N: int) -> np.ndarray:
    if not 0 <= n < 1 << N:
        raise ValueError(f"w_{n} is not level-{N} measurable (need n < 2^{N})")
    cells = np.arange(1 << N, dtype=np.int64)
    return 1 - 2 * _popcount_parity(n & cells)


def walsh_matrix(N: int) -> np.ndarray:
    """Integer matrix whose row n is w_n on cells 0..2^N-1."""
    idx = np.arange(1 << N, dtype=np.int64)
    return 1 - 2 * _popcount_parity(idx[:, None] & idx[None, :])


def _dirichlet_power(k: int, N: int) -> np.ndarray:
    # D_{2^k} = 2^k on I_k, 0 elsewhere
    cells = np.arange(1 << N, dtype=np.int64)
    return np.where(cells & ((1 << k) - 1) == 0, 1 << k, 0).astype(np.int64)


def dirichlet_kernel(n: int, N: int, mode: str = "direct") -> np.ndarray:
    """D_n = w_0 + ... + w_{n-1} on the level-N cells, in integers.

    ``mode="direct"`` sums the Walsh functions; ``mode="closed"`` uses the
    indicator formula for powers of two and the binary-digit representation
    D_n = w_n * sum_j n_j w_{2^j} D_{2^j} otherwise.
    """
    if not 0 <= n <= 1 << N:
        raise ValueError(f"D_{n} needs n <= 2^{N}")
    size = 1 << N
    if mode == "direct":
        out = np.zeros(size, dtype=np.int64)
        for i in range(n):
            out += walsh_function(i, N)
        return out
    if mode != "closed":
        raise ValueError(f"unknown mode {mode!r}")
    if n == 0:
        return np.zeros(size, dtype=np.int64)
    if n & (n - 1) == 0:
        return _dirichlet_power(top_bit(n), N)
    acc = np.zeros(size, dtype=np.int64)
    for j in range(top_bit(n) + 1):
        if n >> j & 1:
            acc += walsh_function(1 << j, N) * _dirichlet_power(j, N)
    return walsh_function(n, N) * acc


def butterfly(x, axes=None) -> np.ndarray:
    """Unscaled radix-2 Walsh-Hadamard butterfly along the given axes.

    Integer input stays integer.  Applying it twice multiplies by 2^N per axis.
    """
    x = np.array(x, copy=True)
    if axes is None:
        axes = range(x.ndim)
    for axis in axes:
        x = np.ascontiguousarray(np.moveaxis(x, axis, -1))
        n = x.shape[-1]
        if n < 1 or n & (n - 1):
            raise ValueError(f"transform length must be a power of two, got {n}")
        lead = x.shape[:-1]
        h = 1
        while h < n:
            y = x.reshape(*lead, n // (2 * h), 2, h)
            top = y[..., 0, :].copy()
            y[..., 0, :] += y[..., 1, :]
            np.subtract(top, y[..., 1, :], out=y[..., 1, :])
            h *= 2
        x = np.moveaxis(x, -1, axis)
    return x


def fwht(f, inverse: bool = False) -> np.ndarray:
    """Forward: exact Walsh-Fourier coefficients (butterfly / 2^N per axis).
    Inverse: the unscaled butterfly, i.e. sum_i c_i w_i."""
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    out = butterfly(f)
    if not inverse:
        out *= 2.0 ** (-N * f.ndim)
    return out


def effective_level(spectrum) -> int:
    """Smallest K with all coefficients outside [0, 2^K)^d equal to zero.

    The function is then level-K measurable and S_n f = f for n >= 2^K.
    """
    c = np.asarray(spectrum)
    resolution(c)
    nz = np.nonzero(c)
    if len(nz[0]) == 0:
        return 0
    top = max(int(ix.max()) for ix in nz)
    return top.bit_length() if top else 0


def partial_sum_1d(g, k: int, spectrum=None) -> np.ndarray:
    """S_k g = sum_{i<k} g^(i) w_i; k beyond 2^N returns g itself."""
    g = np.asarray(g, dtype=float)
    N = resolution(g)
    if k < 0:
        raise ValueError(f"k must be nonnegative, got {k}")
    if k >= 1 << N:
        return g.copy()
    c = fwht(g) if spectrum is None else np.array(spectrum, dtype=float)
    c[k:] = 0.0
    return fwht(c, inverse=True)


def partial_sum_rect(f, M: int, N2: int, spectrum=None) -> np.ndarray:
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if f.ndim != 2:
        raise ValueError("partial_sum_rect expects a 2D grid")
    side = 1 << N
    if not (0 <= M <= side and 0 <= N2 <= side):
        raise ValueError(f"indices ({M}, {N2}) outside [0, {side}]")
    c = fwht(f) if spectrum is None else np.array(spectrum, dtype=float)
    c[M:, :] = 0.0
    c[:, N2:] = 0.0
    return fwht(c, inverse=True)


def marginal_partial_sum(f, M: int, axis: int) -> np.ndarray:
    """S^(1)_M (axis=1, acts on x) or S^(2)_M (axis=2, acts on y)."""
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if f.ndim != 2:
        raise ValueError("marginal_partial_sum expects a 2D grid")
    if axis not in (1, 2):
        raise ValueError(f"axis must be 1 or 2, got {axis}")
    if not 0 <= M <= 1 << N:
        raise ValueError(f"M={M} outside [0, {1 << N}]")
    ax = axis - 1
    c = butterfly(f, axes=[ax]) * 2.0 ** -N
    sl = [slice(None), slice(None)]
    sl[ax] = slice(M, None)
    c[tuple(sl)] = 0.0
    return butterfly(c, axes=[ax])


def quad_partial_sum(spectrum, n: int) -> np.ndarray:
    """S_{n,n} f on its own resolution: the level-L grid, L = |n-1| + 1.

    Since only w_i with i < n <= 2^L appear, S_{n,n} f is level-L measurable;
    the returned 2^L x 2^L array refines (by tiling) to the full-resolution
    result.  For n >= 2^N the full-resolution function itself is returned.
    """
    c = np.asarray(spectrum)
    N = resolution(c)
    if n >= 1 << N:
        return fwht(c, inverse=True)
    L = (n - 1).bit_length() if n > 0 else 0
    side = 1 << L
    sub = np.zeros((side, side))
    sub[:n, :n] = c[:n, :n]
    return butterfly(sub)


def _odd_or_all(lo, hi, parity):
    ns = range(lo, hi + 1)
    if parity == "odd":
        return [n for n in ns if n % 2]
    if parity != "all":
        raise ValueError(f"parity must be 'all' or 'odd', got {parity!r}")
    return list(ns)


def quad_sweep(f, p: float, n_range, parity: str = "all", threads: int = 1):
    """(n, ||S_{n,n} f||_p, ||S_{n,n} f||_weak-L_p) for n in n_range.

    ``n_range`` is an inclusive pair (lo, hi) with lo >= 1.  Values of n past
    the resolution are allowed: there S_{n,n} f = f.  The spectrum is computed
    once; each n is independent, so any thread count gives the same rows.
    """
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if f.ndim != 2:
        raise ValueError("quad_sweep expects a 2D grid")
    if not p > 0:
        raise ValueError(f"p must be positive, got {p}")
    lo, hi = n_range
    if lo < 1 or hi < lo:
        raise ValueError(f"empty or invalid range {n_range}")
    ns = _odd_or_all(lo, hi, parity)
    if not ns:
        raise ValueError(f"no n of parity {parity!r} in {n_range}")
    spec = fwht(f)
    K = effective_level(spec)
    # S_{n,n} f = f once n >= 2^K
    saturated = (lp_quasinorm(f, p), weak_lp_quasinorm(f, p)) if ns[-1] >= 1 << K else None

    def norms(n):
        if n >= 1 << K:
            return (n,) + saturated
        g = quad_partial_sum(spec, n)
        return n, lp_quasinorm(g, p), weak_lp_quasinorm(g, p)

    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(norms, ns))
    return [norms(n) for n in ns]
