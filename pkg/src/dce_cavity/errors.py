"""Exception types raised by the solver, perturbation and dynamics layers."""


class PoleProximityError(ArithmeticError):
    """The axial kernel tan(k d)/k was evaluated at (or next to) a pole."""


class RootNotBracketedError(RuntimeError):
    """The dispersion scan found fewer roots than the requested branch index."""

    def __init__(self, message, interval=None):
        super().__init__(message)
        self.interval = interval


class ContinuationError(RuntimeError):
    """Root tracking from a previous solution lost its bracket."""


class InvalidModeError(ValueError):
    """Mode label that does not correspond to a non-vanishing cavity eigenmode."""


class InvalidDriveError(ValueError):
    """Drive parameters that make the permittivity ratio non-positive."""


class StepRefinementError(RuntimeError):
    """A finite-difference or time-step result is not converged in the step size."""


class ResidualUnderflowError(RuntimeError):
    """Perturbative residuals sit at solver precision so no order can be fitted."""
