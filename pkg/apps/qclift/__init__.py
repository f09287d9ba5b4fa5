"""Quasi-cyclic lifting, encoding and alist I/O."""
