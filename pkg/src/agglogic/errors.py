"""Exception types shared across the package."""

from __future__ import annotations


class AgglogicError(Exception):
    """Base class for all errors raised by this package."""


class EvaluationError(AgglogicError):
    """A formula could not be evaluated on a structure."""


class UnboundVariableError(EvaluationError):
    """A free variable has no value in the supplied assignment."""


class UnknownSymbolError(EvaluationError):
    """A relation symbol does not occur in the structure's signature."""


class ArityMismatchError(EvaluationError):
    """An atom, connective or aggregation was applied at the wrong arity."""


class EmptySequenceError(AgglogicError):
    """An aggregation function was applied to an empty value sequence."""


class FormulaSyntaxError(AgglogicError):
    """Source text does not parse; carries a character position."""

    def __init__(self, message: str, position: int | None = None):
        super().__init__(message if position is None else f"{message} (at position {position})")
        self.position = position


class NonBooleanFormulaError(AgglogicError):
    """A formula expected to be 0/1-valued produced another value."""


class NotQuantifierFreeError(AgglogicError):
    """An operation restricted to aggregation-free formulas met an aggregation."""


class CapExceededError(AgglogicError):
    """A variable-count or enumeration cap was exceeded."""


class UnsupportedConditionError(AgglogicError):
    """The elimination engine only ships with constant-true conditions."""


class InconsistentGuardError(AgglogicError):
    """A guard conjunction is unsatisfiable where a consistent one is required."""


class IncompleteTypeError(AgglogicError):
    """A guard passed as a complete type fails to decide some literal."""


class ContinuityViolationError(AgglogicError):
    """An aggregation function failed its continuity probe at derived parameters.

    Carries the guard (complete type) at which the failure occurred, the
    frequency parameters, the probe report with its counterexample, and the
    AST path of the offending aggregation node.
    """

    def __init__(self, message: str, *, guard=None, params=None, report=None, path=()):
        super().__init__(message)
        self.guard = guard
        self.params = params
        self.report = report
        self.path = tuple(path)


class NotStabilizedError(AgglogicError):
    """Numeric limit extrapolation failed to settle within tolerance."""


class NudgeFailedError(AgglogicError):
    """No configured threshold perturbation made the probe pass."""
