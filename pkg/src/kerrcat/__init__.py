"""Numerical toolkit for the semiclassical nonautonomous Kerr-cat oscillator."""

__version__ = "0.1.0"
