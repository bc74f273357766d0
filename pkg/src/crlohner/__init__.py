"""Rigorous C^r-Lohner integration, Poincare map derivatives and normal forms."""

__version__ = "0.1.0"
