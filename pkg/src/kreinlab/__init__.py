"""Krein resolvent calculus for finite-dimensional triplets and point interactions in R^3."""

__version__ = "0.1.0"
