"""Error types raised across the package."""


class HILError(Exception):
    """Base class for all errors raised by this package."""


class ZeroVector(HILError):
    """A vector with (near-)zero norm was passed where a direction is required."""


class ParseError(HILError):
    """A dataset or config file could not be parsed."""

    def __init__(self, message, line=None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class DimensionMismatch(ParseError):
    """Vector dimensions disagree (between operands, or between file records)."""


class InvalidSpec(HILError):
    """A synthetic-data spec violates its constraints."""


class UnknownLabel(HILError):
    """A cluster label does not exist in the memory bank."""


class EmptyBank(HILError):
    """A memory bank has no rows for the requested modality/level."""


class EmptyPool(HILError):
    """A candidate pool is empty after self-exclusion."""


class NonFinite(HILError):
    """A loss or gradient became NaN/inf, signalling upstream numerical failure."""


class NoClusters(HILError):
    """Batch sampling was requested but a modality has no clusters."""


class StaleLabels(HILError):
    """Unified labels were produced for a different epoch parity than requested."""


class MismatchedInstances(HILError):
    """Two labelings do not cover the same instance set."""


class NoRelevant(HILError):
    """No retained query has a relevant gallery item."""


class NoPairs(HILError):
    """No positive or no negative cross-modal pair exists."""
