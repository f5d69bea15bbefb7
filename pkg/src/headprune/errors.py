"""Exception hierarchy shared across the package.

The CLI maps these onto process exit codes: config problems exit 2,
oracle/bridge failures exit 3, internal invariant violations exit 4.
"""


class HeadPruneError(Exception):
    """Base class for all errors raised by this package."""


class BoundsError(HeadPruneError):
    """A head index lies outside the model geometry."""


class ConfigError(HeadPruneError):
    """A run configuration is invalid. Carries every violation found."""

    def __init__(self, errors):
        if isinstance(errors, str):
            errors = [errors]
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class OracleError(HeadPruneError):
    """An accuracy oracle failed to produce a value."""

    def __init__(self, message, partial=None):
        super().__init__(message)
        # Populated with the in-progress solution when a search aborts.
        self.partial = partial


class TableMissError(OracleError):
    """A table oracle was asked for a mask it has no entry for."""


class ProtocolError(OracleError):
    """An external evaluator violated the wire protocol."""


class InternalInvariantError(HeadPruneError):
    """The engine detected a state that should be unreachable."""
