"""
Phase diagram of the edge-triangle model in the replica symmetric regime.

- solver.py - stationary points, phase classification, critical curve, rate function
- limits.py - Gaussian and quartic limit laws used as verification targets
- scan.py - phase-diagram grids and the traced critical curve
"""
