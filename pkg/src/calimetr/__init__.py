"""Calibration and uncertainty metrics, sparsification curves and temperature sweeps."""

__version__ = "0.1.0"
