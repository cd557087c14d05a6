"""Exception types shared across the package."""


class DomainError(ValueError):
    """Input outside an operation's mathematical domain (e.g. gamma pole)."""


class AccuracyError(RuntimeError):
    """A quadrature or series failed to reach its accuracy target in budget."""


class InversionUnstableError(AccuracyError):
    """Numerical Laplace inversion methods disagree beyond tolerance.

    Carries both candidate values so callers can inspect the disagreement.
    """

    def __init__(self, message, primary=None, check=None):
        super().__init__(message)
        self.primary = primary
        self.check = check


class TailMassError(AccuracyError):
    """Density mass beyond the supplied tau horizon exceeds the allowed bound."""

    def __init__(self, message, tail_mass=None):
        super().__init__(message)
        self.tail_mass = tail_mass


class GridResolutionError(ValueError):
    """A stencil has too few points before the requested evaluation time."""


class StepRejectionError(RuntimeError):
    """A PDE step failed conditioning checks; a finer grid is required."""


class InsufficientHorizonError(ValueError):
    """A subordinator path does not reach the requested wall-time horizon."""


class GenerationError(RuntimeError):
    """Random path generation failed (e.g. circulant embedding not PSD)."""


class ConfigError(ValueError):
    """Experiment configuration is missing or inconsistent."""
