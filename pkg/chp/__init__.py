"""Verification toolkit for dynamic logic of communicating hybrid programs."""

__version__ = "0.1.0"
