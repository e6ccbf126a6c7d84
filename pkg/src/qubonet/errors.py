"""Exception types shared across the package."""


class ConfigError(ValueError):
    """A run configuration is invalid or incomplete."""


class SolverError(RuntimeError):
    """A solver backend failed or was asked to do something it cannot."""


class RemoteSamplerError(SolverError):
    """The remote sampling service misbehaved (transport, HTTP, or payload)."""


class AuthError(RemoteSamplerError):
    """The remote sampling service rejected our credentials."""
