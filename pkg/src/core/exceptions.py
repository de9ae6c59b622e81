"""
Global exception classes for the edge-triangle laboratory.

This module defines custom exception classes used across all components
(phase solver, exact mean-field sums, enumeration, sampler, harness, CLI).
Having centralized exceptions lets the CLI map every failure category to a
stable exit code, and lets callers catch a whole family (for example every
``ModelError``) without listing individual classes.

Educational Note: Numerical code often signals problems with bare
``ValueError``. A small hierarchy keeps "you asked for something outside the
model's domain" separate from "the model is in the wrong phase for this
quantity" and from "a numerical routine failed", which matter differently to
a user running a verification suite.
"""


class LabException(Exception):
    """Base exception class for all laboratory errors."""

    def __init__(self, message: str, component: str = None, details: dict = None):
        self.message = message
        self.component = component
        self.details = details or {}
        super().__init__(self.message)

    def __str__(self):
        if self.component:
            return f"[{self.component}] {self.message}"
        return self.message


class ConfigurationError(LabException):
    """Raised when a run configuration is invalid (missing seed, bad n, unknown suite)."""
    pass


class ModelError(LabException):
    """Base exception for errors raised by the model computations."""
    pass


class DomainError(ModelError):
    """Raised when an argument lies outside the mathematical domain of an operation."""
    pass


class RegimeError(ModelError):
    """Raised when an operation is requested in a phase where it is not defined."""
    pass


class DegenerateError(ModelError):
    """Raised when the requested quantity diverges (e.g. variance at the critical point)."""
    pass


class SizeError(ModelError):
    """Raised when the graph size is outside the supported range of an operation."""
    pass


class EmptyWindowError(ModelError):
    """Raised when a conditioning window carries no probability mass."""
    pass


class ConvergenceError(ModelError):
    """Raised when a root finder or zero finder cannot meet its residual bound."""
    pass


class HarnessError(LabException):
    """Base exception for statistics and verification errors."""
    pass


class InsufficientDataError(HarnessError):
    """Raised when a trace is too short to summarize."""
    pass


class ExportError(LabException):
    """Raised when a result file cannot be written or read back."""
    pass


# Convenience functions for common error scenarios
def raise_config_error(message: str, field: str = None):
    """Raise a configuration error with optional offending field name."""
    details = {"field": field} if field else {}
    raise ConfigurationError(message, component="Configuration", details=details)


def raise_domain_error(message: str, parameter: str = None, value=None):
    """Raise a domain error with optional parameter name and rejected value."""
    details = {}
    if parameter:
        details["parameter"] = parameter
    if value is not None:
        details["value"] = value
    raise DomainError(message, component="Model", details=details)


def raise_regime_error(message: str, regime: str = None, operation: str = None):
    """Raise a regime error with optional regime and operation names."""
    details = {}
    if regime:
        details["regime"] = regime
    if operation:
        details["operation"] = operation
    raise RegimeError(message, component="Model", details=details)
