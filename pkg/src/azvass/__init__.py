"""Exact reachability analysis for affine integer vector addition systems."""

__version__ = "0.1.0"
