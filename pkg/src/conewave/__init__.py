"""Numerical wave-factorisation toolkit for boundary problems in a cone."""

__version__ = "0.1.0"
