"""Compilation-error diagnostics for CI build histories."""

__version__ = "0.1.0"
