"""Explainable intrusion-detection pipeline library."""

__version__ = "0.1.0"
