"""
Exact finite-n computation for the mean-field edge-triangle model.

- exact.py - partition sums, edge-density laws, conditioning windows,
  scaled fluctuation moments and Laplace cross-checks
"""
