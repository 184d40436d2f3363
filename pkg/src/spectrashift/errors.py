"""Exception types shared across the toolkit.

The CLI maps these onto its exit-code contract: input/config problems
exit 2, infeasible generation exits 3, bridge failures exit 4.
"""


class SpectralShiftError(Exception):
    """Base class for all toolkit errors."""


class InvalidInputError(SpectralShiftError):
    """Malformed values or configuration (non-finite data, bad ranges)."""


class InsufficientDataError(SpectralShiftError):
    """Empty or all-degenerate input where at least one usable item is required."""


class CorpusFormatError(SpectralShiftError):
    """A corpus file does not parse under the named format."""

    def __init__(self, message, line=None, column=None):
        super().__init__(message)
        self.line = line
        self.column = column


class LengthMismatchError(CorpusFormatError):
    """Series in one corpus have differing lengths."""

    def __init__(self, message, lines):
        super().__init__(message)
        self.lines = list(lines)


class TooSmallCorpusError(SpectralShiftError):
    """A requested split would leave some partition empty."""


class InfeasibleShiftError(SpectralShiftError):
    """No admissible band shift exists (or the requested one is out of range)."""

    def __init__(self, message, deficit=None):
        super().__init__(message)
        self.deficit = deficit


class ZeroVarianceError(SpectralShiftError):
    """Train labels are constant; z-scoring is undefined."""


class DegenerateThresholdError(SpectralShiftError):
    """Median binning needs at least two distinct train label values."""


class IncompatibleSummariesError(SpectralShiftError):
    """Two spectral summaries cannot be compared (unit or binning mismatch)."""


class DivergenceError(SpectralShiftError):
    """Head training produced a non-finite loss."""

    def __init__(self, message, epoch):
        super().__init__(message)
        self.epoch = epoch


class UndefinedAUCError(SpectralShiftError):
    """AUC is undefined because the evaluation split has a single class."""


class BridgeError(SpectralShiftError):
    """Failure while talking to an external encoder."""


class BridgeProtocolError(BridgeError):
    """The adapter violated the wire protocol."""


class BridgeTimeoutError(BridgeError):
    """The adapter did not reply within the configured timeout."""
