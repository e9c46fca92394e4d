"""The divergent martingale built from Dirichlet-kernel-difference atoms at
lacunary scales alpha_k, its exact coefficient layout and pointwise
magnitudes, and the weighted weak-L_p divergence experiment."""

import math
import warnings
from dataclasses import dataclass, field

import numpy as np

from .hardy import Atom2D, AtomicMartingale, atom_bound, validate_atom
from .strong import weighted_weak_sum
from .walsh import butterfly, dirichlet_kernel, fwht, quad_partial_sum

__all__ = [
    "WeightFn",
    "AlphaSequence",
    "CounterexampleMartingale",
    "select_alphas",
    "build_counterexample",
    "expected_coefficient",
    "expected_coefficients",
    "expected_odd_magnitude",
    "coefficient_check",
    "block_value",
    "odd_cells_magnitudes",
    "divergence_experiment",
]

WEIGHT_KINDS = ("linear", "log2p1", "sqrt", "custom")


@dataclass(frozen=True)
class WeightFn:
    """Nondecreasing weight N -> [1, inf)."""

    kind: str = "linear"
    table: tuple = None

    def __post_init__(self):
        if self.kind not in WEIGHT_KINDS:
            raise ValueError(f"unknown weight kind {self.kind!r}")
        if self.kind == "custom":
            t = np.asarray(self.table, dtype=float)
            if t.size == 0 or np.any(t < 1) or np.any(np.diff(t) < 0):
                raise ValueError("custom weight table must be nondecreasing and >= 1")

    def __call__(self, n) -> float:
        if n < 1:
            raise ValueError("weights are evaluated at positive integers")
        if self.kind == "linear":
            return float(n)
        if self.kind == "log2p1":
            return math.log2(n + 1)
        if self.kind == "sqrt":
            return math.sqrt(n)
        t = self.table
        return float(t[min(int(n), len(t)) - 1])


@dataclass(frozen=True)
class AlphaSequence:
    alphas: tuple
    p: float
    weight: WeightFn
    truncated: bool = False

    @property
    def witness(self) -> float:
        """Partial sum of Phi(2^alpha_k)^(-p/4) over the chosen scales."""
        return float(sum(self.weight(2 ** a) ** (-self.p / 4) for a in self.alphas))


def _validate_alphas(alphas):
    alphas = tuple(int(a) for a in alphas)
    if not alphas:
        raise ValueError("alpha list is empty")
    if alphas[0] < 2:
        raise ValueError(f"alpha_0 must be >= 2, got {alphas[0]}")
    if any(b <= a for a, b in zip(alphas, alphas[1:])):
        raise ValueError(f"alphas must be strictly increasing: {alphas}")
    return alphas


def select_alphas(weight: WeightFn, p: float, count=None, max_level: int = 60,
                  alphas=None) -> AlphaSequence:
    """Choose the lacunary scales.

    Auto mode takes, for k = 0..count-1, the least alpha > alpha_{k-1} with
    Phi(2^alpha)^(p/4) >= 2^k, so the witness series is dominated by a
    geometric one.  Passing ``alphas`` validates an explicit list instead.
    """
    if not 0 < p < 1:
        raise ValueError(f"p must lie in (0, 1), got {p}")
    if alphas is not None:
        return AlphaSequence(_validate_alphas(alphas), p, weight)
    if count is None or count < 1:
        raise ValueError("auto mode needs count >= 1")
    out = []
    alpha = 2
    for k in range(count):
        while alpha <= max_level and weight(2 ** alpha) ** (p / 4) < 2.0 ** k:
            alpha += 1
        if alpha > max_level:
            break
        out.append(alpha)
        alpha += 1
    if not out:
        raise ValueError(f"no admissible alpha up to max_level={max_level}")
    truncated = len(out) < count
    if truncated:
        warnings.warn(f"auto alphas clipped at max_level={max_level}: "
                      f"{len(out)} of {count} scales found", stacklevel=2)
    return AlphaSequence(tuple(out), p, weight, truncated)


def block_value(alpha: int, p: float, weight: WeightFn) -> float:
    """2^(alpha(2/p-2)) / Phi(2^alpha)^(1/4): the coefficient on block alpha."""
    return _scale(alpha, p) * _lam(alpha, weight)


def _scale(alpha, p):
    # bound / 4^alpha, so the atom's sup norm hits the bound exactly
    return atom_bound(p, alpha) / 4.0 ** alpha


def _lam(alpha, weight):
    return weight(2 ** alpha) ** -0.25


@dataclass
class CounterexampleMartingale:
    p: float
    weight: WeightFn
    alphas: AlphaSequence
    A: int
    realized: np.ndarray = field(repr=False)
    lambdas: tuple
    realized_alphas: tuple
    excluded_alphas: tuple
    atoms: list = field(repr=False)
    patterns: list = field(repr=False)  # integer (D - D) x (D - D) grids

    @property
    def martingale(self) -> AtomicMartingale:
        return AtomicMartingale(list(zip(self.lambdas, self.atoms)), self.p)

    def partial(self, level: int) -> np.ndarray:
        """sum of lambda_k a_k over the atoms with alpha_k + 1 <= level."""
        out = np.zeros_like(self.realized)
        for lam, atom, a in zip(self.lambdas, self.atoms, self.realized_alphas):
            if a + 1 <= level:
                out += lam * atom.grid
        return out


def build_counterexample(p: float, weight: WeightFn, alphas: AlphaSequence,
                         A: int) -> CounterexampleMartingale:
    """Realize f_{A,A} = sum over alpha_k < A of lambda_k a_k at resolution A."""
    seq = alphas.alphas
    if A < seq[0] + 1:
        raise ValueError(f"resolution A={A} resolves no atom (need A >= {seq[0] + 1})")
    realized_alphas = tuple(a for a in seq if a + 1 <= A)
    excluded = tuple(a for a in seq if a + 1 > A)
    if excluded:
        warnings.warn(f"alphas {excluded} exceed resolution A={A} and are excluded",
                      stacklevel=2)
    side = 1 << A
    f = np.zeros((side, side))
    atoms, lambdas, patterns = [], [], []
    for a in realized_alphas:
        dd = dirichlet_kernel(1 << (a + 1), A, "closed") - dirichlet_kernel(1 << a, A, "closed")
        pattern = np.outer(dd, dd)
        atom = validate_atom(Atom2D(_scale(a, p) * pattern, p, a, (0, 0)), rtol=0)
        lam = _lam(a, weight)
        f += lam * atom.grid
        atoms.append(atom)
        lambdas.append(lam)
        patterns.append(pattern)
    return CounterexampleMartingale(p, weight, alphas, A, f, tuple(lambdas),
                                    realized_alphas, excluded, atoms, patterns)


def expected_coefficient(cm: CounterexampleMartingale, i: int, j: int) -> float:
    for a in cm.alphas.alphas:
        lo, hi = 1 << a, 1 << (a + 1)
        if lo <= i < hi and lo <= j < hi:
            return block_value(a, cm.p, cm.weight)
    return 0.0


def expected_coefficients(cm: CounterexampleMartingale) -> np.ndarray:
    """The closed-form coefficient array on [0, 2^A)^2."""
    side = 1 << cm.A
    out = np.zeros((side, side))
    for a in cm.realized_alphas:
        lo, hi = 1 << a, 1 << (a + 1)
        out[lo:hi, lo:hi] = block_value(a, cm.p, cm.weight)
    return out


def coefficient_check(cm: CounterexampleMartingale) -> dict:
    """Compare realized coefficients with the closed form.

    ``integer_exact``: each atom's integer pattern transforms to 4^A times the
    indicator of its diagonal block (no rounding anywhere).  ``float_exact``:
    the floating transform of the realized grid equals the closed form
    bit for bit; ``max_rel_err`` reports the worst relative deviation.
    """
    side = 1 << cm.A
    integer_exact = True
    for a, pattern in zip(cm.realized_alphas, cm.patterns):
        ind = np.zeros((side, side), dtype=np.int64)
        ind[1 << a:1 << (a + 1), 1 << a:1 << (a + 1)] = 1
        integer_exact &= bool(np.array_equal(butterfly(pattern), ind * 4 ** cm.A))
    got = fwht(cm.realized)
    want = expected_coefficients(cm)
    err = float(np.abs(got - want).max() / np.abs(want).max())
    return {"integer_exact": integer_exact,
            "float_exact": bool(np.array_equal(got, want)),
            "max_rel_err": err}


def _block_of(cm, n):
    for a in cm.realized_alphas:
        if (1 << a) < n < (1 << (a + 1)):
            return a
    return None


def expected_odd_magnitude(cm: CounterexampleMartingale, n: int) -> float:
    """|S_{n,n} f| on (G\\I_1) x (G\\I_1) for odd n inside a realized block."""
    if n % 2 == 0:
        raise ValueError(f"n={n} is even")
    a = _block_of(cm, n)
    if a is None:
        raise ValueError(f"n={n} is not strictly inside a realized block")
    return block_value(a, cm.p, cm.weight)


def odd_cells_magnitudes(cm: CounterexampleMartingale, n: int, spectrum=None):
    """|S_{n,n} f| restricted to the cells with x_0 = y_0 = 1."""
    spec = fwht(cm.realized) if spectrum is None else spectrum
    s = np.abs(quad_partial_sum(spec, n))
    return s[1::2, 1::2]


def divergence_experiment(cm: CounterexampleMartingale, n_max=None,
                          threads: int = 1):
    """Weighted weak-L_p sum over odd n with per-scale checkpoints.

    Returns ``(report, checkpoints, verdict)``.  Each checkpoint sits at
    n = 2^(alpha_k+1) - 1 and carries the partial sum, the weak-norm floor
    (value/2) * mu((G\\I_1)^2)^(1/p), the same floor without the 1/2, the
    measured weak norm there and Phi(2^alpha_k)^(3/4).
    """
    if len(cm.realized_alphas) < 2:
        raise ValueError("need at least 2 realized atoms for checkpoints")
    p = cm.p
    last = (1 << (cm.realized_alphas[-1] + 1)) - 1
    if n_max is None:
        n_max = last
    rep = weighted_weak_sum(cm.realized, p, cm.weight, n_max, parity="odd",
                            threads=threads)
    cum = rep.cumulative
    index = {int(n): k for k, n in enumerate(rep.n)}
    odd_measure = 0.25 ** (1.0 / p)
    checkpoints = []
    floors_ok = True
    for k, a in enumerate(cm.realized_alphas):
        n_ck = (1 << (a + 1)) - 1
        if n_ck not in index:
            continue
        value = block_value(a, p, cm.weight)
        floor = 0.5 * value * odd_measure
        gap = [n for n in range((1 << a) + 1, n_ck + 1, 2) if n in index]
        weak_gap = np.array([rep.weak_norm[index[n]] for n in gap])
        ok = bool(np.all(weak_gap >= floor))
        floors_ok &= ok
        checkpoints.append({
            "k": k, "alpha": a, "n_checkpoint": n_ck,
            "partial_sum": float(cum[index[n_ck]]),
            "weak_floor": floor,
            "floor_unhalved": value * odd_measure,
            "weak_norm": float(rep.weak_norm[index[n_ck]]),
            "min_gap_weak_norm": float(weak_gap.min()),
            "floor_met": ok,
            "growth_prediction": cm.weight(2 ** a) ** 0.75,
        })
    if len(checkpoints) < 2:
        raise ValueError("fewer than 2 checkpoints inside the sweep range")
    sums = [c["partial_sum"] for c in checkpoints]
    monotone = all(b > a for a, b in zip(sums, sums[1:]))
    verdict = {"monotone": monotone, "floors_met": floors_ok,
               "pass": monotone and floors_ok}
    return rep, checkpoints, verdict
