"""Exact standing internal-wave solutions from Abel and Schroder functional equations."""

__version__ = "0.1.0"
