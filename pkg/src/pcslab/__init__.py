"""Simulation and analysis toolkit for Pauli check sandwiching on Bell pairs."""

__version__ = "0.1.0"
