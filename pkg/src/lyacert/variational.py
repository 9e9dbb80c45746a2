"""Direct minimization of the Sobolev-type quotients behind the Lyapunov constants.

For an exponent ``p`` put ``q = 2p/(p-1)`` (``q = inf`` at ``p = 1`` and
``q = 2`` at ``p = inf``). The quotient is

    I_p(v) = int_0^T v'^2 / ||v||_q^2

over functions with ``v(T) = v(0)`` (periodic, plus the shift constraint
that makes ``||v + k||_q`` minimal in ``k``) or ``v(T) = -v(0)``
(antiperiodic, unconstrained). Grid functions are read as piecewise
linear: ``int v'^2`` uses forward differences and is exact, ``||v||_q`` uses
the trapezoid rule, and ``||v||_inf`` is the maximum over nodes.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy.optimize import brentq

from .constants import PExponent
from .errors import DegenerateError, DomainError, PreconditionError
from .grid import ANTIPERIODIC, PERIODIC, GridFunction, bc_sign, normalize_bc


@dataclass
class MinimizationResult:
    value: float
    minimizer: GridFunction
    iterations: int
    constraint_residual: float
    converged: bool = True
    seed_index: int = 0
    seed_values: list = field(default_factory=list)


# --- discrete operators on the N independent node values -----------------------


def _energy(x, h, sign):
    d = np.diff(np.append(x, sign * x[0]))
    return float(d @ d) / h


def _stiffness_apply(x, h, sign):
    """``K x`` where ``x.K.x = int v'^2``; ``-K x / h`` is the second difference."""
    nxt = np.roll(x, -1)
    nxt[-1] *= sign
    prv = np.roll(x, 1)
    prv[0] *= sign
    return (2.0 * x - nxt - prv) / h


def _stiffness_solve(g, h, sign):
    """Solve ``K y = g`` by FFT; periodic solves return the mean-free solution.

    The antiperiodic stiffness is diagonalized by twisting with
    ``exp(i pi j / N)``, which turns the sign flip at the wrap into a plain
    circulant.
    """
    n = g.size
    j = np.arange(n)
    if sign > 0:
        theta = 2.0 * np.pi * j / n
        eig = (2.0 - 2.0 * np.cos(theta)) / h
        eig[0] = np.inf
        return np.fft.ifft(np.fft.fft(g) / eig).real
    twist = np.exp(-1j * np.pi * j / n)
    theta = (2.0 * j + 1.0) * np.pi / n
    eig = (2.0 - 2.0 * np.cos(theta)) / h
    return (np.fft.ifft(np.fft.fft(g * twist) / eig) * np.conj(twist)).real


def _norm_sq(x, h, q):
    if q == math.inf:
        return float(np.max(np.abs(x))) ** 2
    if q == 2.0:
        return h * float(x @ x)
    return (h * float(np.sum(np.abs(x) ** q))) ** (2.0 / q)


def _norm_sq_grad(x, h, q, periodic):
    """Gradient of ``||x||_q^2``; for periodic q=inf, of ``((max - min)/2)^2``."""
    g = np.zeros_like(x)
    if q == math.inf:
        if periodic:
            a, b = int(np.argmax(x)), int(np.argmin(x))
            half = 0.5 * (x[a] - x[b])
            g[a] += half
            g[b] -= half
        else:
            a = int(np.argmax(np.abs(x)))
            g[a] = 2.0 * x[a]
        return g
    if q == 2.0:
        return 2.0 * h * x
    d = _norm_sq(x, h, q)
    return 2.0 * d ** (1.0 - q / 2.0) * h * np.abs(x) ** (q - 2.0) * x


def _shift_for_constraint(x, q):
    """The k with ``x + k`` in X_p^per, i.e. the minimizer of ``||x + k||_q``."""
    hi, lo = float(np.max(x)), float(np.min(x))
    if q == math.inf:
        return -0.5 * (hi + lo)
    if q == 2.0:
        return -float(np.mean(x))
    span = hi - lo
    y = x / span
    r = q - 2.0

    def moment(k):
        z = y + k
        return float(np.sum(np.abs(z) ** r * z))

    k = brentq(moment, -hi / span, -lo / span, xtol=1e-17, rtol=1e-15, maxiter=500)
    return k * span


def _constraint_residual(x, q, periodic):
    if not periodic:
        return 0.0
    if q == math.inf:
        return abs(float(np.max(x) + np.min(x))) / float(np.max(x) - np.min(x))
    r = q - 2.0
    a = np.abs(x)
    return abs(float(np.sum(a**r * x))) / float(np.sum(a ** (r + 1.0)))


# --- public operations ----------------------------------------------------------


def functional_Ip(bc, p, v):
    """Evaluate the Lyapunov quotient ``I_p`` of a grid function.

    Raises
    ------
    DegenerateError
        If ``v`` vanishes identically.
    PreconditionError
        If ``v`` carries a different boundary tag than ``bc``.
    """
    bc = normalize_bc(bc)
    p = PExponent.parse(p)
    if v.boundary != bc:
        raise PreconditionError(f"grid function is {v.boundary}, quotient is {bc}")
    x = v.values
    if not np.any(x):
        raise DegenerateError("quotient undefined for the zero function")
    h = v.step
    return _energy(x, h, bc_sign(bc)) / _norm_sq(x, h, p.sobolev_exponent)


def project_to_Xp(p, v):
    """Shift a periodic grid function by a constant into X_p^per.

    p=1: ``max + min = 0``; p=inf: zero mean; otherwise
    ``int |v|^(2/(p-1)) v = 0``, solved by bracketed root finding on the
    increasing map ``k -> int |v+k|^(2/(p-1)) (v+k)``.
    """
    p = PExponent.parse(p)
    if v.boundary != PERIODIC:
        raise PreconditionError("project_to_Xp applies to periodic grid functions")
    x = v.values
    if np.ptp(x) == 0.0:
        raise DegenerateError("constant function projects to zero")
    return v.with_values(x + _shift_for_constraint(x, p.sobolev_exponent))


def _seed_values(bc, n, index, T):
    x = np.arange(n) * (T / n)
    base = 2.0 * np.pi / T if bc == PERIODIC else np.pi / T
    if index == 0:
        return np.cos(base * x)
    rng = np.random.default_rng(index)
    out = np.zeros(n)
    for k in range(1, 9):
        # antiperiodic functions only carry odd multiples of pi/T
        freq = base * (k if bc == PERIODIC else 2 * k - 1)
        a, b = rng.standard_normal(2) / k**1.5
        out += a * np.cos(freq * x) + b * np.sin(freq * x)
    return out


def _descend(x, h, q, sign, max_iter, tol, window=50):
    """Preconditioned gradient descent; a unit trial step of 1/2 is inverse iteration."""
    periodic = sign > 0

    def prepare(y):
        if periodic:
            y = y + _shift_for_constraint(y, q)
        return y / math.sqrt(_norm_sq(y, h, q))

    x = prepare(x)
    value = _energy(x, h, sign)  # norm is 1 after prepare
    history = [value]
    it = 0
    converged = False
    while it < max_iter:
        it += 1
        grad = 2.0 * _stiffness_apply(x, h, sign) - value * _norm_sq_grad(x, h, q, periodic)
        direction = -_stiffness_solve(grad, h, sign)
        if periodic:
            direction -= direction.mean()
        tau = 0.5
        accepted = None
        while tau > 1e-14:
            trial = x + tau * direction
            if np.ptp(trial) > 0.0 or not periodic:
                try:
                    trial = prepare(trial)
                except (ValueError, ZeroDivisionError):
                    trial = None
                if trial is not None:
                    trial_value = _energy(trial, h, sign)
                    if trial_value < value:
                        accepted = (trial, trial_value)
                        break
            tau *= 0.5
        if accepted is None:
            # no descent at any step: stationary to working precision
            converged = True
            break
        x, value = accepted
        history.append(value)
        if len(history) > window and abs(history[-1 - window] - value) < tol * value:
            converged = True
            break
    return x, value, it, converged


def minimize_Ip(bc, p, T, N, seeds=4, *, max_iter=100_000, tol=1e-10):
    """Minimize ``I_p`` over grid functions with ``N`` cells, multi-start.

    Seed 0 is ``cos(2 pi x/T)`` (periodic) or ``cos(pi x/T)``
    (antiperiodic); seeds ``1..seeds`` are random smooth functions drawn
    from ``default_rng(index)``. The best value wins, ties by seed index.

    Returns
    -------
    MinimizationResult
        ``converged`` is False if the best run hit ``max_iter``.
    """
    bc = normalize_bc(bc)
    p = PExponent.parse(p)
    T = float(T)
    if not T > 0:
        raise DomainError("period must be positive")
    if int(N) < 64:
        raise DomainError("N must be at least 64")
    if int(seeds) < 1:
        raise DomainError("seeds must be positive")
    N = int(N)
    h = T / N
    q = p.sobolev_exponent
    sign = bc_sign(bc)
    best = None
    seed_values = []
    for index in range(int(seeds) + 1):
        x0 = _seed_values(bc, N, index, T)
        x, value, iterations, converged = _descend(x0, h, q, sign, max_iter, tol)
        seed_values.append(value)
        if best is None or value < best[1]:
            best = (x, value, iterations, converged, index)
    x, value, iterations, converged, index = best
    return MinimizationResult(
        value=value,
        minimizer=GridFunction.from_values(T, x, bc),
        iterations=iterations,
        constraint_residual=_constraint_residual(x, q, bc == PERIODIC),
        converged=converged,
        seed_index=index,
        seed_values=seed_values,
    )


def euler_residual(p, v, value):
    """Relative discrete L2 residual of ``u'' + A_p |u|^(q-2) u = 0``.

    ``A_p = value * (int |u|^q)^(-1/p)`` and ``q = 2p/(p-1)``; for
    ``p = inf`` this is ``u'' + value * u = 0``. Only defined for ``p > 1``.
    """
    p = PExponent.parse(p)
    if p.is_one:
        raise DomainError("the Euler equation degenerates at p = 1")
    x = v.values
    h = v.step
    sign = bc_sign(v.boundary)
    q = p.sobolev_exponent
    second = -_stiffness_apply(x, h, sign) / h
    if p.is_infinity:
        forcing = value * x
    else:
        mass = h * float(np.sum(np.abs(x) ** q))
        forcing = value * mass ** (-p.reciprocal) * np.abs(x) ** (q - 2.0) * x
    res = second + forcing
    return float(np.linalg.norm(res) / np.linalg.norm(second))
