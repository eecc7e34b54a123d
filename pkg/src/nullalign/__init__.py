"""Null alignment, boost order and Kundt-congruence toolkit for Lorentzian metrics."""

__version__ = "0.1.0"
