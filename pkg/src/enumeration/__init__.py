"""
Exact enumeration of the edge-triangle model for small graphs.

- smalln.py - joint edge/triangle census, exact laws and moments, partition polynomial and its zeros
"""
