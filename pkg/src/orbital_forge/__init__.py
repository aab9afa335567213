"""Orbital angular-momentum state preparation in a driven 2D optical lattice site."""

__version__ = "0.1.0"
