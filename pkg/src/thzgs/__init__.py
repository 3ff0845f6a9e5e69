"""Terahertz gas sensing: line-by-line absorption, chirp PSD and concentration retrieval."""

__version__ = "0.1.0"
