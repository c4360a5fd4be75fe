"""Exception hierarchy shared by all horizonlab modules."""


class HorizonLabError(Exception):
    """Base class for every error raised by this package."""


class MalformedParametersError(HorizonLabError):
    """Raw parameter input is non-finite or structurally unusable."""


class ConstraintError(HorizonLabError):
    """A regime inequality or data-construction constraint is violated.

    Carries the name of the violated constraint so callers (and the CLI)
    can report it machine-readably.
    """

    def __init__(self, constraint, message):
        self.constraint = constraint
        super().__init__(f"{constraint}: {message}")


class GridMismatchError(HorizonLabError):
    """Fields defined on different sphere grids were combined."""


class PositivityError(HorizonLabError):
    """A quantity required to be strictly positive is not."""


class SlabDomainError(HorizonLabError):
    """(u, ubar) lies outside the validity slab of the interior model."""


class FocusingError(HorizonLabError):
    """The null expansion blew up during cone integration."""

    def __init__(self, ubar, message="trchi diverged"):
        self.ubar = ubar
        super().__init__(f"{message} at ubar={ubar!r}")


class ResolutionError(HorizonLabError):
    """Requested difference order exceeds what the grid supports."""


class NonConvergenceError(HorizonLabError):
    """Newton/continuation failed; carries the solver trace."""

    def __init__(self, message, trace=None):
        self.trace = trace or []
        super().__init__(message)


class DependencyError(HorizonLabError):
    """A pipeline stage was invoked before its upstream artifact exists."""

    def __init__(self, missing, needed_subcommand):
        self.missing = missing
        self.needed_subcommand = needed_subcommand
        super().__init__(
            f"missing artifact {missing!r}; run the {needed_subcommand!r} "
            f"subcommand first"
        )


class ConfigError(HorizonLabError):
    """Run configuration is missing, malformed, or inconsistent."""
