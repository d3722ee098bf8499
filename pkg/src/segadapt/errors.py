"""Exception types shared across the package."""


class SegadaptError(Exception):
    """Base class for all package-specific errors."""


class DecodeError(SegadaptError):
    """Raster file could not be decoded."""


class MissingAsset(SegadaptError):
    """A task descriptor references a text asset that does not exist or is empty."""


class MissingBackgroundClass(SegadaptError):
    """Contrastive class list does not contain 'background' exactly once."""


class InvalidConfig(SegadaptError):
    """A configuration value is missing, out of bounds, or of the wrong kind."""


class NonFiniteObjective(SegadaptError):
    """Trial objective is NaN or infinite."""


class NoTrials(SegadaptError):
    """Optimizer has no observed trials."""


class EmptySpace(SegadaptError):
    """Search space contains no parameters."""


class OutOfBounds(SegadaptError):
    """A point lies outside the owning image."""


class EmptyBox(SegadaptError):
    """A bounding box contains no feature-grid cells."""


class NoDetection(SegadaptError):
    """Grounding found no region for the given sentence."""


class BackendUnavailable(SegadaptError):
    """A model backend could not be reached or failed server-side."""


class ProtocolError(SegadaptError):
    """A wire response violates the backend protocol contract."""


class DimensionMismatch(SegadaptError):
    """Image and mask dimensions disagree."""


class MissingTruth(SegadaptError):
    """Evaluation requested for a sample without a ground-truth mask."""


class AdaptationError(SegadaptError):
    """Adaptation loop could not evaluate a single sample successfully."""
