"""Exception hierarchy. The CLI maps each class to an exit code."""


class SlackApproxError(Exception):
    exit_code = 1


class StructuralError(SlackApproxError, ValueError):
    """Inputs have inconsistent shapes or are otherwise malformed."""

    exit_code = 2


class ValidationError(SlackApproxError, ValueError):
    """Inputs are well-formed but violate a mathematical invariant."""

    exit_code = 3

    def __init__(self, message, violations=()):
        super().__init__(message)
        self.violations = list(violations)


class SolverError(SlackApproxError, RuntimeError):
    """The conic solver did not certify an answer.

    ``partial`` carries whatever bounds were available when it stopped.
    """

    exit_code = 4

    def __init__(self, message, status=None, partial=None):
        super().__init__(message)
        self.status = status
        self.partial = dict(partial or {})


class IndeterminateError(SolverError):
    """A membership oracle could not decide (solver hit its iteration cap)."""


class NumericalError(SlackApproxError, ArithmeticError):
    """NaN/Inf appeared, or an iteration failed to converge."""

    exit_code = 5


class DegenerateSpectrumError(NumericalError):
    """Leading singular value is (numerically) repeated."""
