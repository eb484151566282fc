"""Fermionic Fock-space nuclearity toolkit."""

__version__ = "0.1.0"
