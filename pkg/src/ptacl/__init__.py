"""Resistance analysis for three-valued attribute-based access-control policies."""

__version__ = "0.1.0"
