"""Cohomology intersection matrices of GKZ hypergeometric systems."""

__version__ = "0.1.0"
