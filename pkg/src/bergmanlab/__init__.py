"""Numerical lab for weighted Bergman projections on the disc, the half-plane and Hartogs domains."""

__version__ = "0.1.0"
