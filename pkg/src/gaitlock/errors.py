"""Exception types shared across the gaitlock pipeline."""


class GaitlockError(Exception):
    """Base class for every error this package raises deliberately."""


class EmptyDirectory(GaitlockError):
    """No frame files found where a sequence was expected."""


class DimensionMismatch(GaitlockError):
    """Images or vectors that must share a shape do not."""


class DecodeError(GaitlockError):
    """An image file could not be parsed."""


class TooFewFrames(GaitlockError):
    """An operation needs more frames than the sequence provides."""


class NoPeriodicity(GaitlockError):
    """No qualifying peak in the width-signal autocorrelation."""


class SequenceTooShort(GaitlockError):
    """Signal shorter than the analysis requires."""


class InsufficientCycles(GaitlockError):
    """Fewer complete gait cycles than the feature window needs."""


class EmptyWindow(GaitlockError):
    """Feature window contains no usable silhouettes."""


class BadDimensions(GaitlockError):
    """Wavelet input is not a square power-of-two grid."""


class BadComponentLength(GaitlockError):
    """Feature component has the wrong dimension for fusion."""


class SingleClass(GaitlockError):
    """Binary training data carries only one label."""


class NonFinite(GaitlockError):
    """Training data contains NaN or infinity."""


class TooFewClasses(GaitlockError):
    """Multi-class training needs at least two classes."""


class FormatError(GaitlockError):
    """Model file is truncated or malformed."""


class VersionMismatch(GaitlockError):
    """Model file written by an incompatible format version."""


class LengthMismatch(GaitlockError):
    """Truth and prediction label lists differ in length."""


class EmptyInput(GaitlockError):
    """An evaluation was attempted on zero samples."""


class SpecOutOfBounds(GaitlockError):
    """Walker geometry does not fit inside the frame."""


class StageError(GaitlockError):
    """A pipeline stage failed; carries the stage name and the cause."""

    def __init__(self, stage: str, cause: Exception):
        super().__init__(f"[{stage}] {cause}")
        self.stage = stage
        self.cause = cause
