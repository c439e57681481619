"""Exception hierarchy.

Raised errors carry enough diagnostics (offending eigenvalue, node, time) for
a verification report to record the failure without re-running the check.
"""

from __future__ import annotations


class IdfiError(Exception):
    """Base class for all package errors."""


class ValidationError(IdfiError):
    """Bad input: shape/domain/precondition violations."""


class NumericsError(IdfiError):
    """A numerical routine left its certified regime (overflow, singular
    matrix, quadrature tolerance failure)."""


class BlowUpError(NumericsError):
    """A comparison solution crossed its finite-time blow-up."""

    def __init__(self, message: str, blow_up_time: float | None = None):
        super().__init__(message)
        self.blow_up_time = blow_up_time


class UnsupportedRegimeError(IdfiError):
    """The requested quantity falls in a regime the theory does not cover;
    callers surface this as an explicit report tag, never as a silent skip."""
