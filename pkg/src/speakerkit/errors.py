"""Exception types shared across the package."""


class SpeakerKitError(Exception):
    """Base class for all package-specific errors."""


class BadParams(SpeakerKitError):
    """A parameter value is outside its documented domain."""


class MalformedFile(SpeakerKitError):
    """A file does not parse as its declared format."""


class UnsupportedFormat(SpeakerKitError):
    """A file parses but uses an encoding this package does not handle."""


class EmptySignal(SpeakerKitError):
    """An operation received a zero-length signal."""


class ZeroSignalPower(SpeakerKitError):
    """SNR is undefined for a signal with zero mean-square power."""


class SignalTooShort(SpeakerKitError):
    """The signal is shorter than one analysis frame."""


class LevelTooDeep(SpeakerKitError):
    """Requested decomposition depth exceeds what the signal supports."""


class LengthMismatch(SpeakerKitError):
    """Stored coefficient lengths are inconsistent with their bookkeeping."""


class NegativeFrequency(SpeakerKitError):
    """A frequency parameter is negative or otherwise out of band."""


class DegenerateBand(SpeakerKitError):
    """Two adjacent mel grid points map to the same FFT bin."""


class BadLength(SpeakerKitError):
    """A vector length does not match what the transform expects."""


class EmptySequence(SpeakerKitError):
    """A feature sequence with zero frames was passed where frames are required."""


class DimensionMismatch(SpeakerKitError):
    """Two feature sequences disagree on vector dimension."""


class EmptyTemplateSet(SpeakerKitError):
    """Classification was requested against zero templates."""


class SequenceTooShort(SpeakerKitError):
    """A training sequence has fewer frames than the model has states."""


class EmptyTrainingSet(SpeakerKitError):
    """Training was requested on zero sequences."""


class EmptyModelSet(SpeakerKitError):
    """Identification was requested against zero models."""


class FeatureKindMismatch(SpeakerKitError):
    """Features of one kind were offered to a model of another kind."""
