"""Mertens function computation, a three-state Ising transfer matrix, and
upper-bound verification for M(n)."""

__version__ = "0.1.0"
