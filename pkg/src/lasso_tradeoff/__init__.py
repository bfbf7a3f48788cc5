"""Lasso FDP/TPP trade-off: boundary curve, state evolution and simulations."""

__version__ = "0.1.0"
