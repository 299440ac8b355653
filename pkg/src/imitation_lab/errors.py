"""Exception types shared across the package.

The CLI maps these to exit codes: ConfigError and DataFormatError exit 2,
NumericalError exits 3. Everything else is a plain bug.
"""


class ConfigError(Exception):
    """Invalid or inconsistent configuration."""


class UsageError(Exception):
    """An operation was called with arguments that violate its contract."""


class SamplingError(Exception):
    """A sample was requested that the buffer cannot provide."""


class NumericalError(Exception):
    """A loss or parameter became non-finite."""


class DataFormatError(Exception):
    """A file on disk does not match the expected format."""
