"""Exception types shared across the toolkit.

Errors are split by how the caller should react: bad input documents or
arguments (InputError), misuse of an operation's contract (ContractError),
and blown resource caps on deliberately exponential constructions
(ResourceLimitError).
"""


class HcsError(Exception):
    """Base class for all toolkit errors."""


class InputError(HcsError):
    """Malformed model, unknown symbol, alphabet mismatch, bad document."""


class ContractError(HcsError):
    """An operation was called outside its stated precondition."""


class UnsupportedGuardError(ContractError):
    """The guard kind present in the model is not supported by this operation."""


class ResourceLimitError(HcsError):
    """A state/configuration/node cap was exceeded."""

    def __init__(self, message: str, cap: int):
        super().__init__(message)
        self.cap = cap
