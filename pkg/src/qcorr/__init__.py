"""Operational and algebraic quantum correlations for finite-dimensional systems."""
