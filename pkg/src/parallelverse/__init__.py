"""Toolkit for comparing verse-aligned parallel translations."""

__version__ = "0.1.0"
