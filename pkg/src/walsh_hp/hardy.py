"""Dyadic martingale structure on G x G: conditional expectations onto the
square filtration F_{n,n}, the maximal function, H_p quasinorms, p-atoms
and atomic decompositions."""

import math
from dataclasses import dataclass, field

import numpy as np

from .dyadic import coarsen, integrate, lp_quasinorm, refine, resolution

__all__ = [
    "conditional_expectation",
    "maximal_function",
    "hp_quasinorm",
    "Atom2D",
    "atom_bound",
    "cube_mask",
    "validate_atom",
    "make_atom",
    "random_atom",
    "atom_corpus",
    "translate",
    "diagonal_average",
    "AtomicMartingale",
    "atomic_bound",
]


def _grid2d(f):
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if f.ndim != 2:
        raise ValueError("expected a 2D grid")
    return f, N


def conditional_expectation(f, n: int) -> np.ndarray:
    """E_{n,n} f: average over each 2^-n x 2^-n dyadic square."""
    f, N = _grid2d(f)
    if not 0 <= n <= N:
        raise ValueError(f"n={n} outside [0, {N}]")
    return refine(coarsen(f, n), N - n)


def maximal_function(f) -> np.ndarray:
    """f* = max_{0<=n<=N} |E_{n,n} f| (E_{n,n} f = f beyond the resolution)."""
    f, N = _grid2d(f)
    out = np.abs(conditional_expectation(f, 0))
    for n in range(1, N + 1):
        np.maximum(out, np.abs(conditional_expectation(f, n)), out=out)
    return out


def hp_quasinorm(f, p: float) -> float:
    return lp_quasinorm(maximal_function(f), p)


def atom_bound(p: float, support_level: int) -> float:
    """mu(I x I)^(-1/p) for a square of side 2^-support_level."""
    return 2.0 ** (2 * support_level / p)


def cube_mask(N: int, support_level: int, support_base) -> np.ndarray:
    """Boolean 2D mask of I_level(z') x I_level(z'')."""
    low = (1 << support_level) - 1
    cells = np.arange(1 << N)
    mx = (cells & low) == (support_base[0] & low)
    my = (cells & low) == (support_base[1] & low)
    return mx[:, None] & my[None, :]


@dataclass(frozen=True)
class Atom2D:
    grid: np.ndarray = field(repr=False)
    p: float
    support_level: int
    support_base: tuple

    @property
    def resolution(self) -> int:
        return resolution(self.grid)

    @property
    def bound(self) -> float:
        return atom_bound(self.p, self.support_level)

    @property
    def saturation(self) -> float:
        return float(np.abs(self.grid).max() / self.bound)


def validate_atom(atom: Atom2D, rtol: float = 1e-12):
    """Raise ValueError unless the three atom conditions hold.

    ``rtol`` absorbs rounding from floating-point mean removal; atoms built
    from dyadic values pass with ``rtol=0``.
    """
    grid, N = _grid2d(atom.grid)
    if not 0 < atom.p <= 1:
        raise ValueError(f"p={atom.p} outside (0, 1]")
    if not 0 <= atom.support_level <= N:
        raise ValueError(f"support level {atom.support_level} outside [0, {N}]")
    if not np.all(np.isfinite(grid)):
        raise ValueError("atom values must be finite")
    mask = cube_mask(N, atom.support_level, atom.support_base)
    if np.any(grid[~mask] != 0):
        raise ValueError("atom does not vanish outside its support cube")
    peak = float(np.abs(grid).max())
    if abs(integrate(grid)) > rtol * peak:
        raise ValueError(f"atom integral {integrate(grid)!r} is not zero")
    if peak > atom.bound * (1 + rtol):
        raise ValueError(f"sup norm {peak} exceeds bound {atom.bound}")
    return atom


def make_atom(raw, p: float, support_level: int, support_base) -> Atom2D:
    """Turn a grid supported on a dyadic square into a p-atom.

    The mean over the square is removed, then the values are shrunk (never
    enlarged) so the sup norm meets mu(I x I)^(-1/p).
    """
    raw, N = _grid2d(raw)
    if not 0 <= support_level <= N:
        raise ValueError(f"support level {support_level} outside [0, {N}]")
    z1, z2 = (int(z) for z in support_base)
    if not (0 <= z1 < 1 << N and 0 <= z2 < 1 << N):
        raise ValueError(f"support base {support_base} outside the grid")
    mask = cube_mask(N, support_level, (z1, z2))
    if np.any(raw[~mask] != 0):
        raise ValueError("raw grid does not vanish outside the declared cube")
    vals = raw.copy()
    vals[mask] -= vals[mask].mean()
    peak = float(np.abs(vals).max())
    if peak == 0:
        raise ValueError("grid is identically zero after mean removal")
    bound = atom_bound(p, support_level)
    if peak > bound:
        vals *= bound / peak
    low = (1 << support_level) - 1
    atom = Atom2D(vals, p, support_level, (z1 & low, z2 & low))
    return validate_atom(atom)


def random_atom(p: float, support_level: int, seed: int, resolution: int,
                depth=None) -> Atom2D:
    """Seeded random p-atom on a uniformly placed cube.

    Values are uniform on [-1, 1] (quantized to multiples of 2^-20) on the
    sub-squares of level ``support_level + depth`` inside the cube, made mean
    zero in exact integer arithmetic, then scaled by a power of two so the
    sup norm lies in [bound/2, bound].  All values are dyadic rationals, so
    the atom conditions hold exactly.  ``depth=None`` draws one value per
    grid cell.
    """
    if not 0 <= support_level < resolution:
        raise ValueError("need 0 <= support_level < resolution")
    vlevel = resolution if depth is None else min(resolution, support_level + depth)
    if vlevel <= support_level:
        raise ValueError("depth must be at least 1")
    rng = np.random.default_rng(seed)
    z = rng.integers(0, 1 << support_level, size=2)
    d = vlevel - support_level
    count = 4 ** d
    while True:
        u = rng.integers(-(1 << 20), (1 << 20) + 1, size=(1 << d, 1 << d))
        w = u * count - u.sum()
        if np.any(w):
            break
    peak = int(np.abs(w).max())
    bound = atom_bound(p, support_level)
    e = math.floor(math.log2(bound / peak))
    while math.ldexp(peak, e) > bound:
        e -= 1
    while math.ldexp(peak, e + 1) <= bound:
        e += 1
    vals = np.ldexp(w.astype(float), e)
    # within-cube coordinates are bits support_level .. vlevel-1
    side = 1 << vlevel
    coarse = np.zeros((side, side))
    idx = z[0] + (np.arange(1 << d) << support_level)
    idy = z[1] + (np.arange(1 << d) << support_level)
    coarse[np.ix_(idx, idy)] = vals
    grid = refine(coarse, resolution - vlevel)
    atom = Atom2D(grid, p, support_level, (int(z[0]), int(z[1])))
    return validate_atom(atom, rtol=0)


def atom_corpus(p: float, count: int, resolution: int, seed: int = 0,
                max_depth: int = 3):
    """Yield ``(index, depth, atom)`` for a deterministic corpus.

    Atom ``i`` draws its value depth from 1..max_depth and its support level
    from 0..resolution-depth with a generator keyed on (seed, i), so the
    structural choices do not depend on p.
    """
    for i in range(count):
        rng = np.random.default_rng([seed, i])
        depth = int(rng.integers(1, max_depth + 1))
        depth = min(depth, resolution)
        level = int(rng.integers(0, resolution - depth + 1))
        yield i, depth, random_atom(p, level, [seed, i, 1], resolution, depth)


def translate(f, shift) -> np.ndarray:
    """g(x, y) = f(x + s', y + s'') for the dyadic shift (s', s'')."""
    f, N = _grid2d(f)
    cells = np.arange(1 << N)
    return f[np.ix_(cells ^ int(shift[0]), cells ^ int(shift[1]))]


def _centered(atom: Atom2D) -> Atom2D:
    if atom.support_base == (0, 0):
        return atom
    return Atom2D(translate(atom.grid, atom.support_base), atom.p,
                  atom.support_level, (0, 0))


def diagonal_average(atom: Atom2D) -> np.ndarray:
    """tau -> integral of a(t + tau, t) dt, for the atom moved to the null cube."""
    a = _centered(atom).grid
    N = resolution(a)
    t = np.arange(1 << N)
    tau = t[:, None]
    return a[tau ^ t[None, :], t[None, :]].sum(axis=1) / (1 << N)


@dataclass
class AtomicMartingale:
    terms: list
    p: float

    def realize(self) -> np.ndarray:
        if not self.terms:
            raise ValueError("empty decomposition")
        out = np.zeros_like(self.terms[0][1].grid, dtype=float)
        for mu, atom in self.terms:
            out += mu * atom.grid
        return out

    def at_level(self, n: int) -> np.ndarray:
        """f_{n,n} = sum_k mu_k E_{n,n} a_k."""
        out = None
        for mu, atom in self.terms:
            g = mu * conditional_expectation(atom.grid, n)
            out = g if out is None else out + g
        return out


def atomic_bound(m: AtomicMartingale) -> float:
    """(sum |mu_k|^p)^(1/p) for the given decomposition."""
    if not m.terms:
        raise ValueError("empty decomposition")
    return float(sum(abs(mu) ** m.p for mu, _ in m.terms) ** (1.0 / m.p))
