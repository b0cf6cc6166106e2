"""Gröbner bases, Koszul duality and psi actions for twisted algebras and operads."""

__version__ = "1.0.0"
