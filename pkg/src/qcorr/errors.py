"""Exception hierarchy and the tagged ``Undefined`` result."""

from __future__ import annotations

from dataclasses import dataclass


class QcorrError(Exception):
    """Base class for all library errors."""


class NotHermitian(QcorrError, ValueError):
    pass


class NotAState(QcorrError, ValueError):
    pass


class NotPureState(QcorrError, ValueError):
    pass


class NumericalFailure(QcorrError, ArithmeticError):
    pass


class DimensionMismatch(QcorrError, ValueError):
    pass


class UnknownOutcome(QcorrError, KeyError):
    pass


class UnknownRepresentation(QcorrError, ValueError):
    pass


class ValueNotInSupport(QcorrError, ValueError):
    pass


class ValueNotInSpectrum(ValueNotInSupport):
    pass


class UndefinedConditional(QcorrError, ArithmeticError):
    pass


class NonDichotomic(QcorrError, ValueError):
    pass


class TrivialObservable(QcorrError, ValueError):
    pass


class InvalidBloch(QcorrError, ValueError):
    pass


class InvalidInstrument(QcorrError, ValueError):
    pass


@dataclass(frozen=True)
class Undefined:
    """Result of a ratio whose denominator fell below the weight floor.

    Falsy, so ``if value:`` style checks treat it as missing.  ``magnitude``
    carries the offending denominator (a probability or overlap).
    """

    reason: str
    magnitude: float = 0.0

    def __bool__(self) -> bool:
        return False

    def __repr__(self) -> str:
        return f"Undefined({self.reason!r}, magnitude={self.magnitude:.3g})"
