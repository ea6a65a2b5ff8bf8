"""Exception types shared across the package."""


class GRPError(Exception):
    """Base class for errors raised by this package."""


class InputError(GRPError, ValueError):
    """Rejected input: malformed mesh, field or function."""


class ConfigError(GRPError, ValueError):
    """An invalid or out-of-range run configuration."""


class BlowUpError(GRPError, RuntimeError):
    """The update produced non-finite values.

    ``last_field`` is the last finite state and ``step`` the index of the
    failing step.
    """

    def __init__(self, message, last_field=None, step=None):
        super().__init__(message)
        self.last_field = last_field
        self.step = step
