"""Exception hierarchy shared by every module."""

from typing import Any, Dict


class ApeleError(ValueError):
    """Base class for all domain errors; carries structured context."""

    def __init__(self, message: str, **context: Any):
        self.message = message
        self.context: Dict[str, Any] = {k: v for k, v in context.items() if v is not None}
        super().__init__(self._render())

    def _render(self) -> str:
        if not self.context:
            return self.message
        details = ", ".join(f"{key}={value}" for key, value in self.context.items())
        return f"{self.message} ({details})"


# Wavefunction input
class MissingSection(ApeleError):
    pass


class MalformedNumber(ApeleError):
    pass


class InvariantViolation(ApeleError):
    pass


class UnsupportedPrimitiveType(ApeleError):
    pass


# Grid
class CoincidentNuclei(ApeleError):
    pass


class UnsupportedLebedevOrder(ApeleError):
    pass


class UnknownElement(ApeleError):
    pass


class LengthMismatch(ApeleError):
    pass


# Integrals and holes
class OrderTooHigh(ApeleError):
    pass


class NegligibleDensity(ApeleError):
    pass


class NoBracket(ApeleError):
    pass


class NonPositiveDensity(ApeleError):
    pass


# Reports
class UnknownAtomIndex(ApeleError):
    pass


# Diagnostics
class EmptyMatrix(ApeleError):
    pass


class DivisionByZeroDomain(ApeleError):
    pass


class ZeroDenominator(ApeleError):
    pass


class LambdaOutOfRange(ApeleError):
    pass


class OutOfRange(ApeleError):
    pass


class UnknownKind(ApeleError):
    pass


class UnknownClassForKind(ApeleError):
    pass


class TagMismatch(ApeleError):
    pass


class ConstantSeries(ApeleError):
    pass


class ConstantPredictor(ApeleError):
    pass


class SchemaError(ApeleError):
    pass


# Files
class MissingFile(ApeleError):
    pass
