"""Closed-form best L^p Lyapunov constants for periodic and antiperiodic problems.

For ``1 < p < inf`` the periodic constant is

    beta_p^per(T) = 16 I(p)^2 p / (T^(2 - 1/p) (p-1)^(1 - 1/p) (2p-1)^(1/p))

with ``I(p) = int_0^1 (1 - s^q)^(-1/2) ds`` and ``q = 2p/(p-1)``; the
antiperiodic constant is one quarter of it. The endpoints are
``beta_1^per = 16/T``, ``beta_inf^per = 4 pi^2 / T^2``, ``beta_1^ant = 4/T``
and ``beta_inf^ant = pi^2 / T^2``.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, special

from .errors import DomainError
from .grid import ANTIPERIODIC, PERIODIC, GridFunction, normalize_bc

ONE = "one"
FINITE = "finite"
INFINITY = "infinity"


@dataclass(frozen=True, order=False)
class PExponent:
    """An exponent ``p`` in ``[1, inf]`` with explicit endpoint variants.

    Use :meth:`one`, :meth:`infinity`, :meth:`finite` or :meth:`parse`;
    ``p = 1`` and ``p = inf`` are never represented as ``finite``.
    """

    kind: str
    p: float = field(default=None)

    def __post_init__(self):
        if self.kind == FINITE:
            if self.p is None or not math.isfinite(self.p) or not self.p > 1.0:
                raise DomainError(f"finite exponent requires 1 < p < inf, got {self.p!r}")
            object.__setattr__(self, "p", float(self.p))
        elif self.kind in (ONE, INFINITY):
            object.__setattr__(self, "p", None)
        else:
            raise DomainError(f"unknown exponent kind {self.kind!r}")

    @classmethod
    def one(cls):
        return cls(ONE)

    @classmethod
    def infinity(cls):
        return cls(INFINITY)

    @classmethod
    def finite(cls, p):
        return cls(FINITE, p)

    @classmethod
    def parse(cls, value):
        """Accept a PExponent, a number, or strings like ``'1'``, ``'2.5'``, ``'inf'``."""
        if isinstance(value, PExponent):
            return value
        if isinstance(value, str):
            text = value.strip().lower()
            if text in ("inf", "infinity", "oo", "∞"):
                return cls.infinity()
            try:
                value = float(text)
            except ValueError:
                raise DomainError(f"malformed exponent {value!r}") from None
        value = float(value)
        if value == 1.0:
            return cls.one()
        if value == math.inf:
            return cls.infinity()
        return cls.finite(value)

    @property
    def is_one(self):
        return self.kind == ONE

    @property
    def is_infinity(self):
        return self.kind == INFINITY

    @property
    def is_finite(self):
        return self.kind == FINITE

    @property
    def value(self):
        """Numeric value, ``math.inf`` for the infinity variant."""
        if self.kind == ONE:
            return 1.0
        if self.kind == INFINITY:
            return math.inf
        return self.p

    @property
    def reciprocal(self):
        """``1/p`` with ``1/inf = 0``."""
        return 0.0 if self.kind == INFINITY else 1.0 / self.value

    @property
    def conjugate(self):
        """Hölder conjugate ``p/(p-1)`` as a PExponent."""
        if self.kind == ONE:
            return PExponent.infinity()
        if self.kind == INFINITY:
            return PExponent.one()
        return PExponent.finite(self.p / (self.p - 1.0))

    @property
    def sobolev_exponent(self):
        """``q = 2p/(p-1)``, the power in the denominator of the quotient (``inf`` at p=1, 2 at p=inf)."""
        if self.kind == ONE:
            return math.inf
        if self.kind == INFINITY:
            return 2.0
        return 2.0 * self.p / (self.p - 1.0)

    def sort_key(self):
        return self.value

    def __str__(self):
        if self.kind == ONE:
            return "1"
        if self.kind == INFINITY:
            return "inf"
        return repr(self.p)


def _as_exponent(p):
    return PExponent.parse(p)


def special_integral(p, method="beta"):
    """``I(p) = int_0^1 ds / sqrt(1 - s^q)`` with ``q = 2p/(p-1)``.

    Parameters
    ----------
    p : PExponent or number
        Must be finite, ``1 < p < inf``.
    method : {'beta', 'quad'}
        ``'beta'`` uses ``I = B(1/q, 1/2) / q``. ``'quad'`` integrates
        ``2x / sqrt(1 - (1-x^2)^q)`` over ``[0, 1]`` adaptively (the
        substitution ``s = 1 - x^2`` removes the endpoint singularity); it
        exists as an independent check.
    """
    p = _as_exponent(p)
    if not p.is_finite:
        raise DomainError("special_integral needs a finite exponent 1 < p < inf")
    q = p.sobolev_exponent
    if method == "beta":
        return special.beta(1.0 / q, 0.5) / q
    if method == "quad":

        def integrand(x):
            if x == 0.0:
                return 2.0 / math.sqrt(q)
            # 1 - (1 - x^2)^q without cancellation
            gap = -math.expm1(q * math.log1p(-x * x))
            return 2.0 * x / math.sqrt(gap)

        value, _ = integrate.quad(integrand, 0.0, 1.0, epsabs=0.0, epsrel=1e-13, limit=200)
        return value
    raise DomainError(f"unknown method {method!r}")


@dataclass(frozen=True)
class LyapunovConstant:
    bc: str
    p: PExponent
    period: float
    value: float

    def __float__(self):
        return float(self.value)


def _periodic_value(p, T):
    if p.is_one:
        return 16.0 / T
    if p.is_infinity:
        return 4.0 * math.pi**2 / T**2
    pv = p.p
    I = special_integral(p)
    inv = 1.0 / pv
    return 16.0 * I * I * pv / (T ** (2.0 - inv) * (pv - 1.0) ** (1.0 - inv) * (2.0 * pv - 1.0) ** inv)


def lyapunov_constant(bc, p, T):
    """Best L^p Lyapunov constant for the periodic or antiperiodic problem on ``[0, T]``."""
    bc = normalize_bc(bc)
    p = _as_exponent(p)
    T = float(T)
    if not T > 0:
        raise DomainError(f"period must be positive, got {T}")
    value = _periodic_value(p, T)
    if bc == ANTIPERIODIC:
        value = value / 4.0
    return LyapunovConstant(bc, p, T, value)


def beta(bc, p, T):
    """Shorthand for ``lyapunov_constant(bc, p, T).value``."""
    return lyapunov_constant(bc, p, T).value


def extremal_function(bc, p, T, grid_size):
    """Sampled minimizer of the quotient whose minimum is the constant.

    Only ``p = 1`` and ``p = inf`` have closed forms: the periodic triangle
    wave (slopes +-1, turning points at T/4 and 3T/4), ``T/2 - x``,
    ``cos(2 pi x/T)`` and ``cos(pi x/T)``. Finite ``p`` minimizers come from
    :func:`lyacert.variational.minimize_Ip`.
    """
    bc = normalize_bc(bc)
    p = _as_exponent(p)
    if p.is_finite:
        raise DomainError("no closed-form extremal for 1 < p < inf; use variational.minimize_Ip")
    if int(grid_size) < 8:
        raise DomainError("grid_size must be at least 8")
    T = float(T)
    if not T > 0:
        raise DomainError("period must be positive")
    x = np.linspace(0.0, T, int(grid_size) + 1)
    if p.is_one and bc == PERIODIC:
        v = np.where(x <= T / 4, x, np.where(x <= 3 * T / 4, T / 2 - x, x - T))
    elif p.is_one:
        v = T / 2 - x
    elif bc == PERIODIC:
        v = np.cos(2 * np.pi * x / T)
    else:
        v = np.cos(np.pi * x / T)
    return GridFunction(T, v, bc)
