"""Synchronization analysis for discrete-time, discrete-state random dynamical systems."""

__version__ = "0.1.0"
