"""Nonperturbative cavity QED: model hierarchy, gauge truncation and open-system engines."""

__version__ = "0.1.0"
