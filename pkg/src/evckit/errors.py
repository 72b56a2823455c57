"""Exception types shared across the package."""


class EvcError(Exception):
    """Base class for all errors raised by this package."""


class ParameterError(EvcError, ValueError):
    """Invalid argument values, ranges, or mismatched shapes/lengths."""


class AudioFormatError(EvcError, ValueError):
    """Malformed or unreadable audio file."""


class UnsupportedChannelError(AudioFormatError):
    """Audio file is not mono."""


class UnsupportedDepthError(AudioFormatError):
    """Audio file is not 16-bit PCM."""


class TooShortError(EvcError, ValueError):
    """Signal shorter than one analysis window."""


class InsufficientDataError(EvcError, ValueError):
    """Fewer samples than clusters requested."""


class DegenerateInputError(EvcError, ValueError):
    """Zero-norm vector or zero-variance sequence where a direction/correlation is required."""


class SchemaError(EvcError, ValueError):
    """File content does not match the documented on-disk format."""
