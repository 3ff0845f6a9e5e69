"""Bundled line catalogs and reference records."""
