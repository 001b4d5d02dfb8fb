"""MRC-guided unsupervised sentence simplification for event argument extraction."""

__version__ = "0.1.0"
