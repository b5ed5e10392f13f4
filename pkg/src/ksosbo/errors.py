"""Exception types shared across the package."""


class InputError(ValueError):
    """Caller passed structurally invalid data (dimension mismatch, empty set)."""


class ConfigurationError(ValueError):
    """A configuration value is outside what the toolkit supports."""


class NumericalError(RuntimeError):
    """A numerical routine failed beyond its recovery ladder.

    Attributes
    ----------
    attempted_jitters : list of float
        Diagonal jitter levels tried before giving up, when applicable.
    """

    def __init__(self, message: str, attempted_jitters=None):
        super().__init__(message)
        self.attempted_jitters = list(attempted_jitters or [])
