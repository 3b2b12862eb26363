"""Exception types shared across the package."""


class PDLError(Exception):
    """Base class for all errors raised by pdloss."""


class DomainError(PDLError, ValueError):
    """Input outside the domain of an operation (shape mismatch, p < 1, ...)."""


class FormatError(PDLError, ValueError):
    """Malformed image or feature-map file.

    ``field`` names the offending header field or section when known.
    """

    def __init__(self, message: str, field: str | None = None):
        super().__init__(message)
        self.field = field


class ConfigError(PDLError, ValueError):
    """Inconsistent configuration (e.g. Id projection with factor != 1)."""


class SizeError(DomainError):
    """Problem too large for an exhaustive routine."""


class UnsupportedConfigError(ConfigError):
    """Configuration is valid but the requested operation does not support it."""
