from __future__ import annotations

from typing import TYPE_CHECKING


if TYPE_CHECKING:
    from ._extremal import ValidityReport


__all__ = [
    "BivextError",
    "BracketError",
    "ChainFormatError",
    "ConvergenceError",
    "DegenerateDataError",
    "DensityUnderflowWarning",
    "DomainError",
    "EmptyChainError",
    "InfeasiblePrefixError",
    "InitializationError",
    "InvalidCoefficientsError",
]


class BivextError(Exception):
    """
    Base class of all errors raised by this package.
    """


class DomainError(BivextError, ValueError):
    """
    An argument lies outside the domain of the operation.
    """


class BracketError(DomainError):
    """
    A root-finding target is not enclosed by the bracket.
    """


class ConvergenceError(BivextError, ArithmeticError):
    """
    An iterative method exhausted its iteration budget.
    """


class DegenerateDataError(BivextError, ValueError):
    """
    The data carry no information for the fit (e.g. zero variance).
    """


class InvalidCoefficientsError(DomainError):
    """
    A coefficient vector violates its validity restrictions.

    Attributes:
        report (ValidityReport): The failed validation report.
    """

    def __init__(self, report: ValidityReport, /) -> None:
        super().__init__(f"invalid coefficients: {report}")
        self.report = report


class InfeasiblePrefixError(BivextError, ValueError):
    """
    A sequential coefficient interval is empty given the coefficients fixed so far.
    """


class InitializationError(BivextError, RuntimeError):
    """
    The Markov chain could not be started from a valid state.
    """


class EmptyChainError(BivextError, ValueError):
    """
    A posterior summary was requested from a chain without kept states.
    """


class ChainFormatError(BivextError, ValueError):
    """
    A persisted chain file is missing its header or contains malformed records.
    """


class DensityUnderflowWarning(RuntimeWarning):
    """
    The bracketed factor of the max-stable density fell below the numeric floor.
    """
