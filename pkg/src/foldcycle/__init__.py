"""Numerical laboratory for three time-scale systems near a regular folded
limit-cycle manifold."""

__version__ = "0.1.0"
