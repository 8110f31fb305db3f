"""Exception hierarchy shared by all modules."""


class OpenCavityError(Exception):
    """Base class for every error raised by the package."""


class DomainError(OpenCavityError, ValueError):
    """An input lies outside the domain where an operation is defined."""


class ResolutionError(DomainError):
    """A wavelength grid is too coarse for the features it must resolve."""


class AmbiguityError(DomainError):
    """An integration window overlaps a component it is meant to exclude."""


class InstabilityError(DomainError):
    """The resonator geometry violates the plano-concave stability condition."""


class InfeasibleError(DomainError):
    """A requested target cannot be attained; carries the attainable interval."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class DegeneracyError(DomainError):
    """A parameter is unobservable or a model has no signal to work with."""


class ConfigurationError(OpenCavityError, ValueError):
    """Model components do not fit together (e.g. peak and dipole counts differ)."""


class ResonanceNotFoundError(OpenCavityError):
    """No transmission resonance was found inside the search window."""


class ConvergenceError(OpenCavityError):
    """An iterative solver exhausted its budget. ``best`` holds the best iterate."""

    def __init__(self, message, best=None):
        super().__init__(message)
        self.best = best


class FitError(OpenCavityError):
    """A fit converged to a physically meaningless result."""
