"""
PC-LS Process Package.

Covariance, spectral and Monte Carlo tools for processes that add a locally
stationary mixture component to a periodically correlated one over a
periodic partition of the time axis.
"""

__version__ = "0.1.0"
