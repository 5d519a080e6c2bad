"""Exact and Monte Carlo tools for the harmonic activation and transport chain on Z^2."""
__version__ = "0.1.0"
