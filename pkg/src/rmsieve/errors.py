"""Exception hierarchy for the Reed-Muller sieve package.

Every error raised on purpose by ``rmsieve`` derives from ``SieveError`` so the
CLI can tell validation failures (exit code 2) apart from programming errors.
"""

from __future__ import annotations


class SieveError(Exception):
    """Root of all deliberate ``rmsieve`` errors."""


class InvalidFieldSpec(SieveError, ValueError):
    """Raised when a field description cannot define GF(2^m)."""


class EvenM(InvalidFieldSpec):
    """Raised when the field degree m is even."""


class ReducibleModulus(InvalidFieldSpec):
    """Raised when the modulus polynomial factors over GF(2)."""


class TooLargeToEnumerate(SieveError, ValueError):
    """Raised when an exhaustive enumeration exceeds its size guard."""


class ExactModeTooLarge(SieveError, ValueError):
    """Raised when exact data-domain noise would need more than the N*C guard."""


class MaskedColumn(SieveError, LookupError):
    """Raised when a column index is not part of the (masked) frame."""


class NonPowerOfTwoLength(SieveError, ValueError):
    """Raised when a Walsh-Hadamard input length is not a power of two."""


class InvalidOffsets(SieveError, ValueError):
    """Raised when an offset list is empty, repeated or out of range."""


class EmptySelection(SieveError):
    """Raised when threshold selection keeps no column."""


class SingularGram(SieveError, ArithmeticError):
    """Raised when the support Gram matrix is numerically singular."""


class SupportTooLarge(SieveError, ValueError):
    """Raised when a regression support has more columns than rows."""


class ConfigError(SieveError, ValueError):
    """Raised for unknown or malformed configuration values."""


class ParseError(SieveError, ValueError):
    """Raised when a text input (config, measurement file) cannot be parsed."""
