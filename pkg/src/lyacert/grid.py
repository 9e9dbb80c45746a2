"""Uniform-grid sampled functions on one period."""

from dataclasses import dataclass

import numpy as np

from .errors import DomainError

PERIODIC = "periodic"
ANTIPERIODIC = "antiperiodic"

_BC_ALIASES = {
    "periodic": PERIODIC,
    "per": PERIODIC,
    "antiperiodic": ANTIPERIODIC,
    "ant": ANTIPERIODIC,
    "anti": ANTIPERIODIC,
}


def normalize_bc(bc):
    """Map ``'per'``/``'ant'`` style tags to the canonical names."""
    try:
        return _BC_ALIASES[str(bc).strip().lower()]
    except KeyError:
        raise DomainError(f"unknown boundary condition {bc!r}") from None


def bc_sign(bc):
    """+1 for periodic, -1 for antiperiodic: ``v(T) = sign * v(0)``."""
    return 1.0 if normalize_bc(bc) == PERIODIC else -1.0


@dataclass(frozen=True)
class GridFunction:
    """Samples ``v(x_j)`` at ``x_j = j T / N``, ``j = 0..N``.

    The last sample is tied to the first by the boundary tag, so the
    independent unknowns are ``samples[:-1]``.
    """

    period: float
    samples: np.ndarray
    boundary: str = PERIODIC

    def __post_init__(self):
        if not self.period > 0:
            raise DomainError("period must be positive")
        s = np.array(self.samples, dtype=float)
        if s.ndim != 1 or s.size < 3:
            raise DomainError("samples must be a 1-d array with at least 3 entries")
        b = normalize_bc(self.boundary)
        s[-1] = bc_sign(b) * s[0]
        s.setflags(write=False)
        object.__setattr__(self, "samples", s)
        object.__setattr__(self, "boundary", b)

    @classmethod
    def from_values(cls, period, values, boundary=PERIODIC):
        """Build from the ``N`` independent node values ``v(x_0..x_{N-1})``."""
        values = np.asarray(values, dtype=float)
        last = bc_sign(boundary) * values[0]
        return cls(period, np.append(values, last), boundary)

    @classmethod
    def sample(cls, func, period, n_cells, boundary=PERIODIC):
        x = np.linspace(0.0, period, n_cells + 1)
        return cls(period, func(x), boundary)

    @property
    def n_cells(self):
        return self.samples.size - 1

    @property
    def step(self):
        return self.period / self.n_cells

    @property
    def nodes(self):
        return np.linspace(0.0, self.period, self.n_cells + 1)

    @property
    def values(self):
        """The independent node values (all but the tied endpoint)."""
        return self.samples[:-1]

    def with_values(self, values):
        return GridFunction.from_values(self.period, values, self.boundary)

    def __mul__(self, c):
        return self.with_values(c * self.values)

    __rmul__ = __mul__
