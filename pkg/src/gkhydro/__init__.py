"""Lattice-gas laboratory for exchange dynamics with weak flips: exact
variational transport coefficients, kinetic Monte Carlo, the matching
reaction-diffusion PDE, and the sharp-interface limit."""

__version__ = "0.1.0"
