"""Constraint-based test input generation for SimpleDB database programs."""

__version__ = "0.1.0"
