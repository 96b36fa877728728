"""Exception types shared across the package."""


class TrackforgeError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(TrackforgeError):
    """A text or binary input file is malformed.

    Carries the offending line number when one is known.
    """

    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)


class NonMonotonicFrames(ParseError):
    """Frame indices of a video decrease within a proposals file."""


class EmptySupport(TrackforgeError):
    """A box clipped to a flow field covers no pixel centers."""


class DimensionMismatch(TrackforgeError):
    """Two image grids that must share a shape do not."""


class MissingFlow(TrackforgeError):
    """No flow field is available for a required frame pair."""

    def __init__(self, frame_index):
        self.frame_index = frame_index
        super().__init__(f"no flow field for frame pair {frame_index} -> {frame_index + 1}")


class NotAGap(TrackforgeError):
    """Interpolation was requested between consecutive frames."""


class InvalidDistribution(TrackforgeError):
    """A probability vector violates nonnegativity or normalization."""


class EmptySelection(TrackforgeError):
    """An evaluation was requested over an empty set of probability vectors."""
