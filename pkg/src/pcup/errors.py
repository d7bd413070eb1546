"""Exception types shared across the package.

Everything raised on purpose derives from PcupError so callers (and the
CLI) can tell our failures apart from genuine bugs.
"""


class PcupError(Exception):
    """Base class for package-specific errors."""


class EmptyMeshError(PcupError):
    """Mesh has no triangle with nonzero area."""


class ZeroLengthEdgeError(PcupError):
    """Edge endpoints coincide, so its direction is undefined."""


class TooFewPointsError(PcupError):
    """Asked for more points than the cloud contains."""


class TooFewModelsError(PcupError):
    """Dataset is too small to split into train/validation/test."""


class EmptySetError(PcupError):
    """A set distance was requested on an empty point set."""


class SizeMismatchError(PcupError):
    """Point sets must have equal sizes for this metric."""


class NonpositiveRadiusError(PcupError):
    """Tolerance radius must be strictly positive."""


class ShapeMismatchError(PcupError):
    """Array shape does not match what the operation expects."""


class StaleCacheError(PcupError):
    """Backward pass got caches that do not belong to the forward pass."""


class EmptyTestSetError(PcupError):
    """Evaluation needs at least one test pair."""


class NumericFailureError(PcupError):
    """Training produced a non-finite loss and aborted."""


class ConfigError(PcupError):
    """Malformed configuration or unknown configuration key."""


class CheckpointError(PcupError):
    """Base class for checkpoint file problems."""


class BadMagicError(CheckpointError):
    """File does not start with the checkpoint magic bytes."""


class VersionUnsupportedError(CheckpointError):
    """Checkpoint was written by an unknown format version."""


class TruncatedFileError(CheckpointError):
    """File ends before the declared contents do."""


class ChecksumMismatchError(CheckpointError):
    """Stored checksum does not match the file contents."""
