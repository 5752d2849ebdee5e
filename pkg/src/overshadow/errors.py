"""Exception taxonomy shared across the package.

Exit-code mapping used by the CLI: InputError and subclasses are user/config
mistakes (exit 1); TransportError covers unreachable or misbehaving backends
(exit 2).
"""


class OvershadowError(Exception):
    """Base class for all package errors."""


class InputError(OvershadowError):
    """Invalid argument, malformed record, or violated precondition."""


class ConfigError(InputError):
    """Bad configuration file or flag value."""


class DomainError(InputError):
    """Mathematically undefined operation (zero-vector normalization etc.)."""


class AlignmentError(InputError):
    """A character span overlaps no token."""


class NoCandidatesError(InputError):
    """Keyphrase extraction produced zero candidates after filtering."""


class MalformedRecordError(InputError):
    """A dataset record is missing required structure."""


class DetectionError(OvershadowError):
    """Overshadowing detection could not score any candidate."""


class TrainingError(OvershadowError):
    """Training diverged (non-finite loss)."""


class TransportError(OvershadowError):
    """Backend unreachable or returned a protocol-level failure."""


class PipelineAborted(OvershadowError):
    """A pipeline run died mid-flight; carries the partial state for persistence."""

    def __init__(self, message, state=None):
        super().__init__(message)
        self.state = state
