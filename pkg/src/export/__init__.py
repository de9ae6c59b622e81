"""
Result files.

- writers.py - CSV and JSON writers that embed schema, version and the resolved run configuration
"""
