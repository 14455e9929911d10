"""Exception types shared across the package.

Invalid arguments raise the builtin ``ValueError``; the two classes here cover
the remaining failure categories.
"""


class UnsupportedError(Exception):
    """Raised when an input is valid but exceeds a brute-force or enumeration guard."""


class NumericalFailure(ArithmeticError):
    """Raised when a numerical routine cannot produce a trustworthy answer."""
