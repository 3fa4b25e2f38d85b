"""Exception hierarchy shared across the harness."""


class DamqaError(Exception):
    """Base class for all harness errors."""


class InvalidImageError(DamqaError):
    """Image data is unusable (zero-sized, wrong shape, undecodable)."""


class TemplateError(DamqaError):
    """A prompt template is missing a required placeholder."""


class BackendUnavailableError(DamqaError):
    """The model backend could not be reached after all retries."""


class ProtocolError(DamqaError):
    """The backend answered with something outside the wire contract."""


class DataError(DamqaError):
    """A dataset or predictions file violates its schema."""


class JudgeParseError(DamqaError):
    """No well-formed verdict could be extracted from a judge reply."""
