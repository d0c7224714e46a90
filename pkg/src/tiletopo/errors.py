"""Exception hierarchy shared by all tiletopo modules."""


class TileTopoError(Exception):
    """Base class for every error raised by this package."""


class InvalidWordError(TileTopoError, ValueError):
    pass


class DimensionError(TileTopoError, ValueError):
    pass


class InvalidParameterError(TileTopoError, ValueError):
    pass


class InconsistentParameterError(TileTopoError, ValueError):
    pass


class DomainError(TileTopoError, ValueError):
    pass


class HypothesisViolationError(TileTopoError, ValueError):
    """Raised when inputs fall outside the hypothesis of a closed-form criterion."""


class ResourceError(TileTopoError, RuntimeError):
    """Raised when a request would exceed a configured point or sample budget."""


class UnsupportedConfigurationError(TileTopoError, ValueError):
    pass


class ConfigError(TileTopoError, ValueError):
    def __init__(self, message, line=None):
        self.line = line
        if line is not None:
            message = f"line {line}: {message}"
        super().__init__(message)
