import numpy as np
import pytest


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


def int_grid(rng, N, dims=2, lo=-1000, hi=1000):
    """Random integer-valued grid: every transform of it is exact in float64."""
    return rng.integers(lo, hi + 1, size=(1 << N,) * dims).astype(float)
