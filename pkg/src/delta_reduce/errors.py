"""Exception hierarchy for the delta_reduce package."""

from __future__ import annotations


class DeltaReduceError(Exception):
    """Base class for all package errors."""


class RegistryConflict(DeltaReduceError):
    """An indeterminate name was re-declared with a different kind."""


class UnknownIndeterminate(DeltaReduceError):
    """An identifier was used without being declared in the registry."""


class ResourceLimit(DeltaReduceError):
    """An operation would exceed the configured order/degree/term caps."""


class ZeroDenominator(DeltaReduceError):
    """A rational expression was constructed with an identically zero denominator."""


class DenominatorVanished(DeltaReduceError):
    """A jet assignment lies on the zero set of a denominator; resample."""


class UnrankedIndeterminate(DeltaReduceError):
    """A symbol's base is missing from an elimination ranking's priority list."""


class ConstantPolynomial(DeltaReduceError):
    """Leader/initial/separant requested for a polynomial with no symbols."""


class TargetAbsent(DeltaReduceError):
    """Leading-term extraction target does not occur in the numerator."""


class CertificationFailed(DeltaReduceError):
    """No nonzero certificate could be produced (expression may be zero)."""


class DegenerateSubstitution(DeltaReduceError):
    """A substitution denominator is identically zero.

    Carries the display name of the vanished coefficient so callers can
    report which step of the reduction failed.
    """

    def __init__(self, coefficient: str, message: str = ""):
        self.coefficient = coefficient
        super().__init__(message or f"substitution denominator {coefficient} is zero")


class MalformedSystem(DeltaReduceError):
    """A system does not have the shape an operation requires."""


class DuplicateExponents(DeltaReduceError):
    """Interdefinability matrix requested with repeated exponents."""


class UnknownScenario(DeltaReduceError):
    """No bundled scenario is registered under the requested name."""


class ExpressionSyntaxError(DeltaReduceError):
    """Source text does not conform to the expression grammar."""

    def __init__(self, line: int, column: int, expected: str, found: str = ""):
        self.line = line
        self.column = column
        self.expected = expected
        self.found = found
        what = f"expected {expected}" + (f", found {found}" if found else "")
        super().__init__(f"line {line}, column {column}: {what}")
