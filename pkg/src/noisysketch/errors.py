"""Exception types shared across the package."""


class ZeroVector(ValueError):
    """Operation needs a nonzero vector (e.g. the max/norm ratio divides by the 2-norm)."""


class BadDimensions(ValueError):
    """Operator dimensions violate a structural constraint."""


class DimensionMismatch(ValueError):
    """Operator and vector dimensions disagree."""


class TooLarge(ValueError):
    """Explicit-matrix request exceeds the configured entry cap."""


class BadParams(ValueError):
    """Parameter values violate an invariant of a bound formula or config."""
