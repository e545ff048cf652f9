"""Exact plurigenera and Kodaira dimension of invariant almost complex structures."""

__version__ = "0.1.0"
