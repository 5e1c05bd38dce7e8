"""Exception types shared across the package."""


class DomainError(ValueError):
    """An argument lies outside the domain where an operation is defined."""


class ConstructionError(RuntimeError):
    """A feasible curve could not be built within the search brackets."""


class ResourceError(RuntimeError):
    """A request would exceed the exhaustive-search size limits."""
