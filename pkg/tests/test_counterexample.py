import math
import warnings

import numpy as np
import pytest

from walsh_hp.counterexample import (WeightFn, block_value, build_counterexample,
                                     coefficient_check, divergence_experiment,
                                     expected_coefficient, expected_coefficients,
                                     expected_odd_magnitude, odd_cells_magnitudes,
                                     select_alphas)
from walsh_hp.hardy import atomic_bound, conditional_expectation, hp_quasinorm
from walsh_hp.walsh import fwht


@pytest.fixture(scope="module")
def cm25():
    seq = select_alphas(WeightFn("linear"), 0.5, alphas=(2, 5))
    return build_counterexample(0.5, WeightFn("linear"), seq, 7)


def test_weights():
    assert WeightFn("linear")(8) == 8
    assert WeightFn("log2p1")(3) == 2
    assert WeightFn("sqrt")(16) == 4
    assert WeightFn("custom", (1, 2, 2))(10) == 2
    with pytest.raises(ValueError):
        WeightFn("custom", (2, 1))
    with pytest.raises(ValueError):
        WeightFn("cubic")
    with pytest.raises(ValueError):
        WeightFn("linear")(0)


def test_select_alphas_auto():
    seq = select_alphas(WeightFn("linear"), 0.5, count=4)
    assert seq.alphas == (2, 8, 16, 24)
    assert not seq.truncated
    # witness series is dominated by sum 2^-k
    assert seq.witness <= 2
    with pytest.warns(UserWarning):
        clipped = select_alphas(WeightFn("linear"), 0.5, count=4, max_level=10)
    assert clipped.truncated and clipped.alphas == (2, 8)


def test_select_alphas_explicit():
    with pytest.raises(ValueError):
        select_alphas(WeightFn("linear"), 0.5, alphas=(1, 5))
    with pytest.raises(ValueError):
        select_alphas(WeightFn("linear"), 0.5, alphas=(5, 5))
    with pytest.raises(ValueError):
        select_alphas(WeightFn("linear"), 1.0, alphas=(2, 5))


def test_block_values():
    assert block_value(2, 0.5, WeightFn("linear")) == pytest.approx(16 / math.sqrt(2))
    assert block_value(5, 0.5, WeightFn("linear")) == pytest.approx(2 ** 10 / 32 ** 0.25)


def test_coefficients_exact(cm25):
    chk = coefficient_check(cm25)
    assert chk["integer_exact"]
    assert chk["max_rel_err"] <= 1e-15
    c = fwht(cm25.realized)
    want = expected_coefficients(cm25)
    for i, j in [(4, 4), (7, 4), (32, 63), (3, 3), (8, 8), (4, 32), (100, 100)]:
        assert want[i, j] == expected_coefficient(cm25, i, j)
        assert c[i, j] == pytest.approx(want[i, j], abs=1e-12 * want.max())


def test_odd_cells_magnitudes(cm25):
    for n in (5, 7):
        v = odd_cells_magnitudes(cm25, n)
        assert np.allclose(v, 16 / math.sqrt(2), rtol=1e-12)
        assert expected_odd_magnitude(cm25, n) == pytest.approx(11.31370849898476)
    for n in range(33, 64, 2):
        assert np.allclose(odd_cells_magnitudes(cm25, n), expected_odd_magnitude(cm25, n),
                           rtol=1e-9)
    with pytest.raises(ValueError):
        expected_odd_magnitude(cm25, 6)
    with pytest.raises(ValueError):
        expected_odd_magnitude(cm25, 17)


def test_atoms_and_restriction(cm25):
    for atom in cm25.atoms:
        assert atom.saturation == 1.0
    assert atomic_bound(cm25.martingale) == pytest.approx((2 ** -0.25 + 2 ** -0.625) ** 2)
    assert hp_quasinorm(cm25.realized, 0.5) <= atomic_bound(cm25.martingale) * (1 + 1e-12)
    for level in (3, 6):
        assert np.allclose(conditional_expectation(cm25.realized, level),
                           cm25.partial(level), atol=1e-9)


def test_resolution_limits():
    w = WeightFn("linear")
    seq = select_alphas(w, 0.5, alphas=(2, 5))
    with pytest.raises(ValueError):
        build_counterexample(0.5, w, seq, 2)
    with pytest.warns(UserWarning):
        cm = build_counterexample(0.5, w, seq, 3)
    assert cm.realized_alphas == (2,) and cm.excluded_alphas == (5,)
    with pytest.raises(ValueError):
        divergence_experiment(cm)


def test_divergence_small():
    w = WeightFn("linear")
    seq = select_alphas(w, 0.5, alphas=(2, 4, 6))
    with warnings.catch_warnings():
        warnings.simplefilter("error")
        cm = build_counterexample(0.5, w, seq, 7)
    rep, checkpoints, verdict = divergence_experiment(cm)
    assert verdict == {"monotone": True, "floors_met": True, "pass": True}
    assert [c["n_checkpoint"] for c in checkpoints] == [7, 31, 127]
    assert all(n % 2 for n in rep.n)
    for c in checkpoints:
        assert c["weak_norm"] >= c["weak_floor"]
        assert c["floor_unhalved"] == 2 * c["weak_floor"]
