"""Numerical laboratory for Hölder-type estimates of mappings with unbounded distortion."""

__version__ = "0.1.0"
