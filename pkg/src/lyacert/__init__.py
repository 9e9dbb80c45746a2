"""Sharp L^p Lyapunov constants for periodic and antiperiodic problems,
stability certificates for linear periodic systems, and a solver for
resonant nonlinear periodic problems."""

from .constants import PExponent, beta, extremal_function, lyapunov_constant, special_integral
from .errors import (DegenerateError, DomainError, LyacertError, MajorantInvalid, NonConvergedError,
                     NotFoundError, PreconditionError, ResonantLinearError, WitnessNotFound)
from .grid import ANTIPERIODIC, PERIODIC, GridFunction
from .linear_engine import (MatrixFunction, floquet, lambda1_shooting, monodromy, rayleigh_lambda1,
                            solve_linear_periodic)

__version__ = "0.1.0"

__all__ = [
    "ANTIPERIODIC", "PERIODIC", "GridFunction", "PExponent", "MatrixFunction",
    "beta", "lyapunov_constant", "special_integral", "extremal_function",
    "floquet", "monodromy", "lambda1_shooting", "rayleigh_lambda1", "solve_linear_periodic",
    "LyacertError", "DomainError", "DegenerateError", "PreconditionError", "MajorantInvalid",
    "ResonantLinearError", "NotFoundError", "WitnessNotFound", "NonConvergedError",
]
