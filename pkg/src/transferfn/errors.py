"""Exception hierarchy.

Every domain error carries its class name as ``name`` so the CLI can report
it in structured form.
"""


class TransferFnError(Exception):
    """Base class for domain errors raised by this package."""

    @property
    def name(self) -> str:
        return type(self).__name__


class InvalidInput(TransferFnError, ValueError):
    """A value violates a type invariant (bad shape, bad table, bad weight)."""


class BudgetExceeded(TransferFnError):
    pass


class ShapeMismatch(TransferFnError, ValueError):
    pass


class SymmetryViolated(TransferFnError):
    def __init__(self, message, entry=None):
        super().__init__(message)
        self.entry = entry


class NullInterval(TransferFnError):
    pass


class ParameterOutOfRange(TransferFnError, ValueError):
    pass


class Undefined(TransferFnError, ValueError):
    pass


class RelayUndefined(TransferFnError):
    pass


class MarginalMismatch(TransferFnError):
    pass
