"""Exception types shared across the package."""


class PhonoscoreError(Exception):
    """Base class for all errors raised by this package."""


class ParseError(PhonoscoreError):
    """A document does not follow its expected format."""

    def __init__(self, message: str, line: int | None = None):
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
        self.line = line


class ValidationError(PhonoscoreError):
    """A constructed object violates one of its invariants."""


class UnknownPhoneme(PhonoscoreError):
    """A phone symbol is not part of the relevant inventory."""


class NoRuleMatches(PhonoscoreError):
    """No rewrite rule applies at some position of the input text."""

    def __init__(self, char: str, position: int):
        super().__init__(f"no rule matches {char!r} at position {position}")
        self.char = char
        self.position = position


class DimensionMismatch(PhonoscoreError):
    """Vector or matrix shapes are inconsistent."""


class NonPositiveTemperature(PhonoscoreError):
    """Softmax temperature must be strictly positive."""


class EmptyCostMatrix(PhonoscoreError):
    """Alignment requires a cost matrix with at least one symbol."""


class SizeLimitExceeded(PhonoscoreError):
    """Input too large for the exhaustive reference algorithm."""


class ProfileMismatch(PhonoscoreError):
    """A sequence was validated against a different profile."""


class ZeroLengthUtterance(PhonoscoreError):
    """Rates are undefined for an empty canonical sequence."""


class EmptyReference(PhonoscoreError):
    """Word error rate is undefined for an empty reference."""


class SegmentationOutOfRange(PhonoscoreError):
    """A posterior segment lies outside the frame range or overlaps another."""


class RowNotNormalized(PhonoscoreError):
    """A posterior row does not sum to one."""


class MissingConfusionMatrix(PhonoscoreError):
    """The requested operation needs a profile with a confusion matrix."""


class MissingDurations(PhonoscoreError):
    """The requested operation needs per-token durations."""


class IdMismatch(PhonoscoreError):
    """Canonical and recognized inputs do not cover the same utterance ids."""


class DuplicateId(PhonoscoreError):
    """An utterance id occurs more than once in one input."""
