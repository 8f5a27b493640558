"""Exact dynamics and entanglement of a double Jaynes-Cummings model with photon hopping."""

__version__ = "0.1.0"
