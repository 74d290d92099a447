"""Exception hierarchy.

Every error raised on purpose by the package derives from
:class:`FrameletError`, so callers can catch one type.
"""

from __future__ import annotations


class FrameletError(Exception):
    """Base class for all package errors."""


class InputError(FrameletError, ValueError):
    """Invalid argument supplied by the caller."""


class CheckFailed(FrameletError):
    """A numerical verification did not meet its tolerance."""


# lattice-linalg
class SingularMatrix(InputError):
    pass


class NotExpansive(InputError):
    pass


class NotInteger(InputError):
    pass


class JordanFailure(FrameletError, ArithmeticError):
    """Eigenvector basis too ill-conditioned for the diagonal construction."""


class DegenerateLambda0(InputError):
    pass


# smooth-windows
class NonpositiveRho(InputError):
    pass


class BadEps0(InputError):
    pass


class BadEps(InputError):
    pass


# generators
class NegativeRadicand(FrameletError, ArithmeticError):
    pass


# directional
class BadRho(InputError):
    pass


class PartitionResidualTooLarge(CheckFailed):
    pass


class IndexOutOfRange(InputError, IndexError):
    pass


# filterbank
class GridTooCoarse(InputError):
    pass


class DivergentMaskBudget(InputError):
    pass


# verify
class LengthMismatch(InputError):
    pass


class SupportOverflow(InputError):
    pass


class NoConvergence(CheckFailed):
    pass


# transform
class PlanOverflow(InputError):
    pass


class PlanTooSmall(InputError):
    pass


class SizeMismatch(InputError):
    pass


# io / cli
class FormatError(FrameletError, IOError):
    """Malformed file or manifest."""
