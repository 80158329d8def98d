"""Permutation-symmetric simulation and sensing metrics for multiple-quantum NMR spin clusters."""
__version__ = "0.1.0"
