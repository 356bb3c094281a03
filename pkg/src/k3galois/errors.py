"""Exception types shared across the package.

The CLI maps them onto exit codes: :class:`CheckFailed` -> 1,
:class:`InvalidInput` -> 2, :class:`NumericalFailure` -> 3.
"""


class InvalidInput(ValueError):
    """Input violates a precondition (degree, arity, smoothness, ...)."""

    def __init__(self, message: str, witness=None):
        super().__init__(message)
        self.witness = witness


class NumericalFailure(RuntimeError):
    """A numerical procedure did not converge or could not be certified."""


class SingularJacobian(NumericalFailure):
    pass


class CheckFailed(AssertionError):
    """A mathematical consistency check returned a negative answer."""
