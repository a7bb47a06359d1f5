"""Numerical laboratory for Schwarz-integral representability in the unit disc."""
__version__ = "0.1.0"
