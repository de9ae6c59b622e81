"""
Settings, logging and the exception hierarchy shared by every laboratory package.

- settings.py - ETLAB_* tolerances, chain lengths, worker count and output defaults
- logging_config.py - console and rotating-file handlers
- exceptions.py - LabException and its model, harness, configuration and export branches

Numerical packages raise the typed errors from exceptions.py; the cli maps
them onto exit codes.
"""

__version__ = "0.1.0"
