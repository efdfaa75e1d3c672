"""Desk-scale laboratory for Lewis signaling games with learning agents."""

__version__ = "0.1.0"
