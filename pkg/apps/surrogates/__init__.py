"""Surrogate channel matching and the J-function."""
