"""Semiclassical quantization, Stokes graphs and exactness audits for 1D potentials."""

__version__ = "0.1.0"
