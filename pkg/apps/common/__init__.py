"""Shared errors, unit conversion and random-stream helpers."""
