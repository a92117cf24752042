"""Sums of POD and SPOD weights: exact truncations, bounds and growth rates."""

__version__ = "0.1.0"
