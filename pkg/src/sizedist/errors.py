"""Exception taxonomy shared across the package.

Everything raised intentionally by the library derives from SizedistError so
callers (and the CLI) can distinguish expected analysis failures from bugs.
"""

from __future__ import annotations


class SizedistError(Exception):
    """Base class for all errors raised by this package."""


class SupportError(SizedistError, ValueError):
    """Evaluation or fitting requested outside a model's support."""


class InputError(SizedistError):
    """Unusable input file, column selector, or configuration."""


class InsufficientDataError(SizedistError):
    """Sample too small for the requested operation."""


class DegenerateSampleError(SizedistError):
    """Sample carries no usable variation (e.g. all values equal)."""


class DegenerateMixtureError(SizedistError):
    """Every mixture-fit attempt collapsed a component."""


class OptimizerError(SizedistError):
    """Numerical optimization failed to produce an acceptable optimum.

    ``best_point`` carries the least-bad candidate found, for diagnosis.
    """

    def __init__(self, message: str, best_point=None):
        super().__init__(message)
        self.best_point = best_point


class StepSizeError(SizedistError):
    """Diffusion simulation produced a drift increment too large for dt."""
