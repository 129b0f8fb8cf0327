"""Numerical toolkit for velocity averages of kinetic transport equations on periodic grids."""

__version__ = "0.1.0"
