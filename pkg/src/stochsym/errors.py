"""Exception hierarchy shared by the analyses and the command line."""


class StochsymError(Exception):
    """Base class for toolkit errors."""


class ValidationError(StochsymError, ValueError):
    """Malformed or inconsistent input."""


class DimensionMismatch(ValidationError):
    pass


class CompositionError(ValidationError):
    """Forward and inverse maps of a change of coordinates do not compose to the identity."""


class DomainIncompatible(ValidationError):
    pass


class CapabilityError(StochsymError):
    """A supported operation has no rule for this input (not a wrong answer)."""


class NoIntegrationRule(CapabilityError):
    pass


class NoClosedFormInverse(CapabilityError, ValueError):
    pass


class EliminationError(CapabilityError):
    """Old-chart variables survived substitution of the inverse map."""


class ReductionError(CapabilityError):
    """Reduction left state dependence in the coefficients."""

    def __init__(self, message: str, verdict=None) -> None:
        super().__init__(message)
        self.verdict = verdict


class ConstraintNotSatisfied(StochsymError):
    """The field violates the noise determining equations."""


class SymmetryPreconditionError(StochsymError):
    """The supplied field is not a symmetry of the supplied equation."""

    def __init__(self, message: str, report=None) -> None:
        super().__init__(message)
        self.report = report


class SymmetryNotPreserved(StochsymError):
    """A symmetry failed to survive a change of coordinates."""

    def __init__(self, message: str, before=None, after=None) -> None:
        super().__init__(message)
        self.before = before
        self.after = after
