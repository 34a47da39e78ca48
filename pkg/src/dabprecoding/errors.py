"""Exception types raised across the package."""


class DabError(Exception):
    """Base class for all package errors."""


class InvalidInputError(DabError, ValueError):
    """An argument is malformed, non-finite or out of range."""


class DegenerateChannelError(DabError, ValueError):
    """A channel vector is identically zero."""


class SingularChannelError(DabError, ValueError):
    """The stacked channel matrix is rank deficient or has more users than antennas."""


class ProjectionInfeasibleError(DabError, ArithmeticError):
    """No scaling of the precoder meets the output power budget inside the search bracket."""


class ConfigError(DabError, ValueError):
    """A configuration document is invalid. ``key`` names the offending field."""

    def __init__(self, message, key=None):
        super().__init__(message)
        self.key = key
