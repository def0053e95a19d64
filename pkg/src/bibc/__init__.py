"""Bistatic backscatter simulation: nullspace transmit projection and GLRT detection."""

__version__ = "0.1.0"
