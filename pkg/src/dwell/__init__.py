"""Exact diagonalization, mean-field and Bogoliubov analysis of bosons in a double well,
with or without a molecular mode."""

__version__ = "0.1.0"
