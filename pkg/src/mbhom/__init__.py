"""Morse-Bott-Smale chain complexes from combinatorial flow-category data."""

__version__ = "0.1.0"
