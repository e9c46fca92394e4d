"""Dyadic harmonic analysis toolkit: Walsh-Fourier partial sums on
martingale Hardy spaces H_p(G x G), 0 < p < 1."""

__version__ = "0.1.0"
