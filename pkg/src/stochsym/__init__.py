"""Lie-point symmetries of Ito and Stratonovich SDEs, with numerical checks."""

__version__ = "0.1.0"
