"""Numerical lab for mean-field plus pair-excitation dynamics of many bosons."""

__version__ = "0.1.0"
