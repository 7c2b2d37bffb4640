"""Exception hierarchy shared across the package."""


class TabmarkError(Exception):
    """Base class for all tabmark errors."""


class DataError(TabmarkError):
    """Malformed input data: parse failures, schema or invariant violations."""


class ConfigError(TabmarkError):
    """Invalid configuration or arguments."""


class DecodeError(TabmarkError):
    """Watermark decoding could not produce a result."""


class UndecodableBitError(DecodeError):
    """A bit position received no usable votes from any feature."""
