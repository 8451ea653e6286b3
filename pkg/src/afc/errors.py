"""Exception types shared across the toolkit."""


class AfcError(Exception):
    """Base class for all toolkit errors."""


class InvalidConfigurationError(AfcError):
    """A parameter combination violates an operation's precondition."""


class UnsupportedCodeError(AfcError):
    """The requested fixed-rate code parameters cannot be constructed."""


class InvalidCandidateError(AfcError):
    """A weight-set candidate cannot be repaired into a feasible point."""
