"""Confidence-tagged bounds on spin-system properties from moment-matrix
semidefinite relaxations combined with finite-shot measurement data."""

__version__ = "0.1.0"
