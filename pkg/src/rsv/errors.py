"""Exception types shared across the package."""


class RsvError(Exception):
    """Base class for all package-specific errors."""


class NonPositiveDepth(RsvError):
    """Depth h = h_star + alpha*eta reached zero or below somewhere.

    The offending state, when available, is attached as ``.state``.
    """

    def __init__(self, msg, state=None):
        super().__init__(msg)
        self.state = state


class SingularFactorization(RsvError):
    """Elliptic factorization failed; should be unreachable for valid input."""


class NonZeroMean(RsvError):
    """An operation requiring a zero-mean field received one with nonzero mean."""


class AboveThreshold(RsvError):
    """Relative energy exceeds the depth-positivity threshold."""


class SupportTooWide(RsvError):
    """Generated initial data would not fit in a quarter of the domain."""


class NonNegativeInput(RsvError):
    """A strictly negative input was required."""


class NoBlowupDetected(RsvError):
    """Post-processing asked for blow-up data on a run without a detection."""


class WindowTooNarrow(RsvError):
    """Profile fit window contains fewer points than required."""


class TraceLeftDomain(RsvError):
    """A characteristic trace wrapped more than half the period."""


class CorruptCheckpoint(RsvError):
    """Checkpoint file failed its checksum or is truncated."""


class VersionOrShapeMismatch(RsvError):
    """Checkpoint metadata is incompatible with the requested resume."""
