"""Exception hierarchy shared across the package."""


class CcmorphError(Exception):
    """Base class for all package errors."""


class ConfigurationError(CcmorphError, ValueError):
    """Invalid construction parameters, scenario fields or sampler boxes."""


class DomainError(CcmorphError, ArithmeticError):
    """A field was evaluated outside the region where it is finite and smooth."""


class WindowError(DomainError):
    """Energy outside the admissible window of a ladder frame."""


class DegenerateMetamorphosisError(DomainError):
    """|Omega| fell below the configured floor at a solved point."""

    def __init__(self, message, omega=None):
        super().__init__(message)
        self.omega = omega


class NoSolutionError(CcmorphError):
    """Newton iteration for the implicit energy equation did not converge."""

    def __init__(self, message, residual=None):
        super().__init__(message)
        self.residual = residual


class MultipleRootsError(CcmorphError):
    """Perturbed Newton starts converged to distinct roots (diagnostic mode)."""


class StepSizeError(CcmorphError):
    """Adaptive step size underflowed; the last accepted state is attached."""

    def __init__(self, message, t=None, state=None, trajectory=None):
        super().__init__(message)
        self.t = t
        self.state = state
        self.trajectory = trajectory


class ReparameterizationError(CcmorphError):
    """Omega changes sign (or vanishes) along a trajectory, so t(t_tilde) breaks down."""

    def __init__(self, message, crossing=None):
        super().__init__(message)
        self.crossing = crossing
