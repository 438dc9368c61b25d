"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input lies outside the mathematical domain of an operation."""


class CapabilityError(ValueError):
    """Request exceeds a declared implementation cap (e.g. multipole order)."""


class ConvergenceError(RuntimeError):
    """An iterative computation failed to reach its target tolerance.

    Carries a ``diagnostics`` dict describing how far the computation got
    (last accepted radius, tail estimates, node counts, ...).
    """

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = dict(diagnostics or {})


class ContractionError(RuntimeError):
    """A round-trip mode product reached magnitude >= 1.

    Every per-mode scattering product must stay inside (-1, 1); hitting the
    boundary signals a normalization or geometry bug, so the computation
    aborts instead of returning a silently wrong energy.
    """


class CrossValidationError(RuntimeError):
    """Two independent computation routes disagree beyond tolerance."""


class UndefinedSignError(RuntimeError):
    """Material orderings give no definite sign class and no override was set."""


class ConfigError(ValueError):
    """Invalid run configuration; carries the full list of validation errors."""

    def __init__(self, errors):
        self.errors = list(errors)
        super().__init__("; ".join(self.errors))


class ValidityWarning(UserWarning):
    """A closed-form result was requested outside its validity gate."""
