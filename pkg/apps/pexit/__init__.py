"""Protograph EXIT analysis and decoding thresholds."""
