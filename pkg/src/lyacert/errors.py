"""Exception types raised across lyacert."""


class LyacertError(Exception):
    """Base class for all lyacert errors."""


class DomainError(LyacertError, ValueError):
    """An argument lies outside the domain of the operation."""


class DegenerateError(LyacertError, ValueError):
    """The input makes the requested quantity undefined (zero or constant function)."""


class PreconditionError(LyacertError, ValueError):
    """A documented precondition of an operation does not hold."""


class MajorantInvalid(LyacertError):
    """A supplied diagonal majorant fails ``P(t) <= B(t)`` at some sample."""


class ResonantLinearError(LyacertError):
    """The homogeneous periodic problem has nontrivial solutions.

    Attributes
    ----------
    sigma_min : float
        Smallest singular value of ``I - M`` relative to the largest.
    iterate : ndarray or None
        The iterate that produced the resonant linearization, when raised
        from inside the nonlinear solver.
    """

    def __init__(self, message, sigma_min=None, iterate=None):
        super().__init__(message)
        self.sigma_min = sigma_min
        self.iterate = iterate


class NotFoundError(LyacertError):
    """The antiperiodic eigenvalue scan found no root; carries diagnostics."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class WitnessNotFound(LyacertError):
    """A witness search exhausted its grid. This is not a disproof."""

    def __init__(self, message, diagnostics=None):
        super().__init__(message)
        self.diagnostics = diagnostics or {}


class NonConvergedError(LyacertError):
    """Neither the damped iteration nor the Newton fallback converged."""

    def __init__(self, message, history=None, best=None):
        super().__init__(message)
        self.history = history or []
        self.best = best
