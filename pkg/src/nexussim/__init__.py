"""Coupled electric-gas network adequacy and N-1 security simulator."""

__version__ = "0.1.0"
