"""Exception hierarchy for discnn.

Every error raised by the package derives from ``DiscnnError`` and from the
closest builtin category, so callers can catch either.
"""

from __future__ import annotations


class DiscnnError(Exception):
    """Root of all discnn errors."""


class DimensionMismatchError(DiscnnError, ValueError):
    pass


class NonFiniteValueError(DiscnnError, ValueError):
    pass


class DegenerateInstanceError(DiscnnError, ValueError):
    """A matrix column (or another required quantity) is identically zero."""


class IllPosedInstanceError(DiscnnError, ValueError):
    """A metric is undefined for the given ground truth."""


class IntegrationDivergedError(DiscnnError, ArithmeticError):
    """The integrated state became non-finite."""


class SingularSubsystemError(DiscnnError, ArithmeticError):
    """The Gram block of the active coordinates is not positive definite.

    The exact-subsystem integrator needs a full column-rank active block. Use the
    projected-Euler integrator (``integrator="euler"``) for rank-deficient systems.
    """


class NotPositiveDefiniteError(DiscnnError, ValueError):
    pass


class ActiveSetCyclingError(DiscnnError, RuntimeError):
    pass


class ConfigError(DiscnnError, ValueError):
    pass


class StudyAbortedError(DiscnnError, RuntimeError):
    """Too many instances of a sweep point failed."""


class OutputPathError(DiscnnError, OSError):
    """Results cannot be written to the requested location."""
