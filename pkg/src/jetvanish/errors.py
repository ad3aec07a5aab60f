"""Exception hierarchy shared by the pipeline stages."""


class JetVanishError(Exception):
    """Base class for every error raised by this package."""


class UsageError(JetVanishError, ValueError):
    """Bad arguments: mismatched arity, wrong field, missing unknowns."""


class UnsupportedCaseError(UsageError):
    """The structure result backing the ansatz does not cover this (case, m, jet order)."""


class ConfigError(UsageError):
    """A case configuration failed validation before any heavy work started."""


class InvariantViolation(JetVanishError, RuntimeError):
    """An internal consistency check failed; results cannot be trusted."""


class SamplingError(JetVanishError, RuntimeError):
    """No admissible random point was found within the retry budget."""
