"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain of an operation."""


class IllDefinedRegionError(DomainError):
    """A base lies in the ill-defined neighbourhood of the cut base."""


class ConfigError(ValueError):
    """A configuration is invalid and was rejected before any computation."""
