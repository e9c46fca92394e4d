"""Weighted strong-convergence functionals of quadratical partial sums and
the four-region split of an atom's partial sums.

Region labels: r11 = (G\\I) x (G\\I), r12 = (G\\I) x I, r21 = I x (G\\I),
r22 = I x I, where I = I_N is the level of the atom's support square.
"""

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np
from scipy.special import zeta

from . import __version__
from .dyadic import lp_quasinorm, refine, resolution, weak_lp_quasinorm
from .hardy import Atom2D, _centered, cube_mask, hp_quasinorm
from .walsh import butterfly, effective_level, fwht, quad_partial_sum, quad_sweep

__all__ = [
    "SweepReport",
    "theorem1_sum",
    "simon_1d_sum",
    "theoremG_sum",
    "weighted_weak_sum",
    "region_contributions",
    "atom_theorem1_sum",
    "partial_sum_1d_sweep",
]

REGIONS = ("r11", "r12", "r21", "r22")


@dataclass
class SweepReport:
    p: float
    n: np.ndarray
    strong_norm: np.ndarray
    weak_norm: np.ndarray
    term: np.ndarray
    regions: np.ndarray = None  # shape (len(n), 4), weighted like term
    meta: dict = field(default_factory=dict)

    @property
    def cumulative(self) -> np.ndarray:
        return np.cumsum(self.term)

    @property
    def region_cumulative(self) -> np.ndarray:
        return np.cumsum(self.regions, axis=0)

    @property
    def total(self) -> float:
        return float(self.cumulative[-1]) if len(self.term) else 0.0

    @property
    def n_max(self) -> int:
        return int(self.n[-1])

    def to_csv(self, fh=None) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        head = ["n", "strong_norm", "weak_norm", "term", "cumulative"]
        if self.regions is not None:
            head += list(REGIONS)
        w.writerow(head)
        cum = self.cumulative
        for k, n in enumerate(self.n):
            row = [int(n), repr(float(self.strong_norm[k])),
                   repr(float(self.weak_norm[k])), repr(float(self.term[k])),
                   repr(float(cum[k]))]
            if self.regions is not None:
                row += [repr(float(v)) for v in self.regions[k]]
            w.writerow(row)
        text = buf.getvalue()
        if fh is not None:
            fh.write(text)
        return text

    def summary(self) -> dict:
        out = {"p": self.p, "n_max": self.n_max, "cumulative": self.total,
               "version": __version__}
        out.update(self.meta)
        return out

    def to_json(self) -> str:
        return json.dumps(self.summary(), sort_keys=True, default=_jsonable)


def _jsonable(obj):
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.floating,)):
        return float(obj)
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    raise TypeError(f"not serializable: {type(obj)}")


def _check_open_p(p):
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")


def _tail(f, p, n_max, exponent):
    """Closed-form sum over n > n_max of ||f||_p^p / n^exponent when the
    spectrum is already exhausted (S_{n,n} f = f for all n > n_max)."""
    if (1 << effective_level(fwht(f))) > n_max:
        return None
    return float(lp_quasinorm(f, p) ** p * zeta(exponent, n_max + 1))


def theorem1_sum(f, p: float, n_max=None, threads: int = 1) -> SweepReport:
    """sum_{n <= n_max} ||S_{n,n} f||_p^p / n^(3-2p) with per-n rows.

    ``meta`` carries ||f||_{H_p}, the ratio cumulative / ||f||_{H_p}^p and,
    when S_{n,n} f = f past n_max, the analytic tail of the series.
    """
    _check_open_p(p)
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if n_max is None:
        n_max = 1 << N
    rows = np.array(quad_sweep(f, p, (1, n_max), threads=threads))
    n = rows[:, 0].astype(np.int64)
    strong, weak = rows[:, 1], rows[:, 2]
    term = strong ** p / n.astype(float) ** (3 - 2 * p)
    rep = SweepReport(p, n, strong, weak, term)
    hp = hp_quasinorm(f, p)
    rep.meta.update(resolution=N, hp_norm=hp,
                    ratio=rep.total / hp ** p if hp > 0 else float("nan"),
                    tail=_tail(f, p, n_max, 3 - 2 * p))
    return rep


def partial_sum_1d_sweep(g, p: float, k_max: int):
    """(k, ||S_k g||_p) for k = 1..k_max, each S_k g on its own resolution."""
    g = np.asarray(g, dtype=float)
    N = resolution(g)
    if g.ndim != 1:
        raise ValueError("expected a 1D grid")
    spec = fwht(g)
    K = effective_level(spec)
    full = lp_quasinorm(g, p)
    out = []
    for k in range(1, k_max + 1):
        if k >= 1 << K:
            out.append((k, full))
            continue
        L = (k - 1).bit_length()
        sub = np.zeros(1 << L)
        sub[:k] = spec[:k]
        out.append((k, lp_quasinorm(butterfly(sub), p)))
    return out


def simon_1d_sum(g, p: float, k_max=None) -> SweepReport:
    """sum_{k <= k_max} ||S_k g||_p^p / k^(2-p) for a function on G."""
    _check_open_p(p)
    g = np.asarray(g, dtype=float)
    N = resolution(g)
    if k_max is None:
        k_max = 1 << N
    rows = np.array(partial_sum_1d_sweep(g, p, k_max))
    k = rows[:, 0].astype(np.int64)
    strong = rows[:, 1]
    term = strong ** p / k.astype(float) ** (2 - p)
    rep = SweepReport(p, k, strong, np.full_like(strong, np.nan), term)
    rep.meta.update(resolution=N)
    return rep


def theoremG_sum(f, n_max=None, threads: int = 1) -> SweepReport:
    """sum_{n=2}^{n_max} ||S_{n,n} f||_1 / (n ln^2 n); natural logarithm."""
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if n_max is None:
        n_max = 1 << N
    if n_max < 2:
        raise ValueError("n_max must be at least 2")
    rows = np.array(quad_sweep(f, 1.0, (2, n_max), threads=threads))
    n = rows[:, 0].astype(np.int64)
    nf = n.astype(float)
    term = rows[:, 1] / (nf * np.log(nf) ** 2)
    rep = SweepReport(1.0, n, rows[:, 1], rows[:, 2], term)
    rep.meta.update(resolution=N, log="natural", hp_norm=hp_quasinorm(f, 1.0))
    return rep


def weighted_weak_sum(f, p: float, weight, n_max=None, parity: str = "all",
                      threads: int = 1) -> SweepReport:
    """sum over n of ||S_{n,n} f||_{weak-L_p}^p * weight(n) / n^(3-2p)."""
    _check_open_p(p)
    f = np.asarray(f, dtype=float)
    N = resolution(f)
    if n_max is None:
        n_max = 1 << N
    rows = np.array(quad_sweep(f, p, (1, n_max), parity=parity, threads=threads))
    n = rows[:, 0].astype(np.int64)
    phi = np.array([float(weight(int(k))) for k in n])
    if np.any(phi < 1) or np.any(np.diff(phi) < 0):
        raise ValueError("weight must be nondecreasing and >= 1 on the sampled n")
    term = rows[:, 2] ** p * phi / n.astype(float) ** (3 - 2 * p)
    rep = SweepReport(p, n, rows[:, 1], rows[:, 2], term)
    rep.meta.update(resolution=N, parity=parity)
    return rep


# ---------------------------------------------------------------------------
# four-region split for atoms supported on I_m x I_m (null base)


def _regions_direct(a, m, p, ns):
    N = resolution(a)
    spec = fwht(a)
    inside = cube_mask(N, m, (0, 0))
    row_in = inside[:, 0]
    masks = (
        ~row_in[:, None] & ~row_in[None, :],
        ~row_in[:, None] & row_in[None, :],
        row_in[:, None] & ~row_in[None, :],
        inside,
    )
    out = np.empty((len(ns), 4))
    for k, n in enumerate(ns):
        s = quad_partial_sum(spec, n)
        s = refine(s, N - resolution(s))
        v = np.abs(s) ** p
        out[k] = [v[mk].sum() / v.size for mk in masks]
    return out


def _outside_kernel_integral(n, m, p):
    """Integral over G \\ I_m of |sum_{i<m} n_i w_{2^i} D_{2^i}|^p.

    On I_s \\ I_{s+1} the sum equals (n mod 2^s) - n_s 2^s.
    """
    total = 0.0
    for s in range(m):
        val = (n & ((1 << s) - 1)) - ((n >> s) & 1) * (1 << s)
        total += abs(val) ** p / 2.0 ** (s + 1)
    return total


def _regions_structured(a, m, p, ns):
    """Same quantities as _regions_direct, via the product structure of
    S_{n,n} a off the support square and a block-reduced transform on it.

    For x outside I_m and s in I_m, D_n(x + s) = w_n(x) w_n(s) K_n(x) with
    K_n = sum_{i<m} n_i w_{2^i} D_{2^i}; on I_m, w_j depends only on j >> m.
    """
    N = resolution(a)
    spec = fwht(a)
    K = max(effective_level(spec), m)
    full_r22 = float((np.abs(a) ** p).sum() / a.size)
    bs = 1 << m
    Q = 1 << (K - m)
    C = spec[: 1 << K, : 1 << K]
    blocks = C.reshape(Q, bs, Q, bs)
    cum = blocks.cumsum(axis=1).cumsum(axis=3)
    full = cum[:, -1, :, -1]
    rows = C.reshape(1 << K, Q, bs)
    row_cum = rows.cumsum(axis=2)
    cols = C.T.reshape(1 << K, Q, bs)
    col_cum = cols.cumsum(axis=2)

    out = np.zeros((len(ns), 4))
    for k, n in enumerate(ns):
        if n >= 1 << K:
            out[k, 3] = full_r22
            continue
        q, r = n >> m, n & (bs - 1)
        R = max((n - 1).bit_length() - m, 0)
        width = 1 << R
        # I x I
        B = np.zeros((width, width))
        B[:q, :q] = full[:q, :q]
        if r:
            B[q, :q] = cum[q, r - 1, :q, -1]
            B[:q, q] = cum[:q, -1, q, r - 1]
            B[q, q] = cum[q, r - 1, q, r - 1]
        s22 = butterfly(B)
        r22 = (np.abs(s22) ** p).sum() / (width * width) / 4.0 ** m
        # G\I in one variable: product with K_n
        kout = _outside_kernel_integral(n, m, p)
        g = np.zeros(width)
        h = np.zeros(width)
        g[:q] = rows[n, :q].sum(axis=1)
        h[:q] = cols[n, :q].sum(axis=1)
        if r:
            g[q] = row_cum[n, q, r - 1]
            h[q] = col_cum[n, q, r - 1]
        r12 = kout * (np.abs(butterfly(g)) ** p).sum() / width / bs
        r21 = kout * (np.abs(butterfly(h)) ** p).sum() / width / bs
        r11 = kout * kout * abs(C[n, n]) ** p
        out[k] = [r11, r12, r21, r22]
    return out


def region_contributions(atom: Atom2D, p: float, n_max=None,
                         method: str = "structured") -> SweepReport:
    """Per-n split of ||S_{n,n} a||_p^p / n^(3-2p) over the four regions.

    The atom must sit on the null square I_m x I_m.  ``term`` is the sum of
    the four region columns in the fixed order r11 + r12 + r21 + r22.
    """
    _check_open_p(p)
    if tuple(atom.support_base) != (0, 0):
        raise ValueError("region split needs an atom at the null base; translate first")
    a = np.asarray(atom.grid, dtype=float)
    N = resolution(a)
    m = atom.support_level
    if n_max is None:
        n_max = 1 << N
    ns = list(range(1, n_max + 1))
    if method == "direct":
        raw = _regions_direct(a, m, p, ns)
    elif method == "structured":
        raw = _regions_structured(a, m, p, ns)
    else:
        raise ValueError(f"unknown method {method!r}")
    n = np.array(ns, dtype=np.int64)
    w = n.astype(float) ** (3 - 2 * p)
    regions = raw / w[:, None]
    term = ((regions[:, 0] + regions[:, 1]) + regions[:, 2]) + regions[:, 3]
    strong = (raw.sum(axis=1)) ** (1.0 / p)
    rep = SweepReport(p, n, strong, np.full(len(ns), np.nan), term, regions)
    rep.meta.update(resolution=N, support_level=m, method=method)
    return rep


def atom_theorem1_sum(atom: Atom2D, p: float, n_max=None) -> SweepReport:
    """theorem1 functional of an atom via the structured region split.

    Partial sums commute with dyadic translation and the measure is
    translation invariant, so the atom is first moved to the null base.
    """
    rep = region_contributions(_centered(atom), p, n_max)
    rep.meta["hp_norm"] = hp_quasinorm(atom.grid, p)
    rep.meta["ratio"] = rep.total / rep.meta["hp_norm"] ** p
    return rep
