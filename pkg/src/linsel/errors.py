"""Exception hierarchy.

Every error raised on purpose by the library derives from :class:`LinselError`.
Errors caused by bad user input (wrong dimensions, malformed programs) also
derive from :class:`ValueError`; errors describing a mathematical situation
(point outside a set, cone without a base) derive from :class:`DomainError`.
The CLI maps the first group to exit code 1 and the second to exit code 2.
"""

from __future__ import annotations


class LinselError(Exception):
    """Base class for all library errors."""


class InputError(LinselError, ValueError):
    """Malformed input."""


class DomainError(LinselError):
    """Well-formed input outside the mathematical domain of an operation."""


class MalformedProgram(InputError):
    pass


class MixedDimensions(InputError):
    pass


class EmptyInput(InputError):
    pass


class ArityMismatch(InputError):
    pass


class NotExhaustive(InputError):
    pass


class NonpositiveScalar(DomainError):
    pass


class PointOutside(DomainError):
    pass


class NoConeBasis(DomainError):
    pass


class NotInCone(DomainError):
    pass


class SumMismatch(DomainError):
    pass


class NotPointed(DomainError):
    pass


class DimensionBudget(DomainError):
    pass


class NoBase(DomainError):
    pass


class NotInDomain(DomainError):
    pass


class NoRepresentation(DomainError):
    pass


class NotSuperlinear(DomainError):
    pass


class NotLinear(DomainError):
    pass


class PointNotInValue(DomainError):
    pass


class NoSelection(DomainError):
    pass


class NotSimplex(DomainError):
    pass


class ChoiceOutsideValue(DomainError):
    pass


class InfeasibleSplit(DomainError):
    pass


class NotSurjective(DomainError):
    pass


class NegativeImage(DomainError):
    pass


class NotGenerating(DomainError):
    pass


class BoundTooSmall(DomainError):
    """The requested norm bound is below the smallest feasible one."""

    def __init__(self, c_min):
        super().__init__(f"bound too small; the smallest feasible bound is {c_min}")
        self.c_min = c_min
