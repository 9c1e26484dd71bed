"""Exception hierarchy shared by all gridcodec modules."""


class GridCodecError(Exception):
    """Base class for all errors raised by this package."""


class DimensionMismatch(GridCodecError):
    """Vector or matrix shapes are inconsistent with the declared dimension."""


class NonFinite(GridCodecError):
    """A value that must be finite is NaN or infinite."""


class InvalidTask(GridCodecError):
    """The decision problem parameters are out of range (e.g. budget <= 0)."""


class TooLarge(GridCodecError):
    """Problem size exceeds what a brute-force routine will accept."""


class RankTooLarge(GridCodecError):
    """Requested number of coefficients exceeds the profile dimension."""


class UnsupportedExponent(GridCodecError):
    """The norm exponent is outside the range a routine can differentiate."""


class InvalidBits(GridCodecError):
    """Quantizer bit width below 1."""


class ParseError(GridCodecError):
    """A data file could not be parsed; message names the offending line."""


class EmptySelection(GridCodecError):
    """A dataset filter matched no rows."""
