"""Protograph LDPC design apps."""

__version__ = '1.0.0'
