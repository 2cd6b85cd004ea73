"""Weak measurements with post-selection on a qubit coupled to a Fock-space pointer."""

__version__ = "0.1.0"
