"""Exception and warning types raised by kdvls."""


class KdvlsError(Exception):
    """Base class for all kdvls errors."""


class DomainError(KdvlsError, ValueError):
    """Input lies outside the domain of an operation (CLI exit code 2)."""


class InvalidCoefficients(DomainError):
    pass


class InvalidParams(DomainError):
    pass


class InvalidFamily(DomainError):
    pass


class WrongRegime(DomainError):
    pass


class OutOfDomain(DomainError):
    pass


class NoBifurcations(DomainError):
    pass


class ShapeError(DomainError):
    pass


class NumericalFailure(KdvlsError, RuntimeError):
    """A numerical routine broke down (CLI exit code 3)."""

    def __init__(self, message, **diagnostics):
        super().__init__(message)
        self.diagnostics = diagnostics


class NoConvergence(NumericalFailure):
    def __init__(self, message, last_residual=float("nan"), **diagnostics):
        super().__init__(message, last_residual=last_residual, **diagnostics)
        self.last_residual = last_residual


class TruncationWarning(UserWarning):
    """Profile has not decayed at the domain boundary."""


class TrivialBranch(UserWarning):
    """Newton iteration converged to the uncoupled branch A = 0."""
