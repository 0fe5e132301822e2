"""Delsarte-type bounds for mutually unbiased bases via positive definite functions on U(d)."""

__version__ = "0.1.0"
