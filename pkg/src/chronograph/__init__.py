"""Chronograph: temporal transaction-graph ML toolkit and analyst service."""

__version__ = "0.1.0"
