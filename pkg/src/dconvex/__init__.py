"""Structural dimension reduction of Bayesian networks via d-convex hulls."""

__version__ = "0.1.0"
