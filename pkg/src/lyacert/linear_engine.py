"""Linear periodic systems ``u'' + Q(t) u = 0``: monodromy, Floquet verdicts,
the antiperiodic eigenvalue ``lambda_1`` and periodic linear solves.

Integration is a fixed-step classical RK4 on the first-order system
``y' = S(t) y``, ``S = [[0, I], [-Q, 0]]``. Because the system is linear,
each step is a ``2n x 2n`` matrix; all step matrices are built at once and
multiplied in a balanced tree, so a monodromy costs a handful of batched
``matmul`` calls. Results depend only on the step count, which defaults to
4096 per period and can be overridden with ``LYACERT_STEPS``.
"""

import math
import os
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, linalg, optimize
from scipy.interpolate import CubicSpline

from .errors import DomainError, NotFoundError, ResonantLinearError

DEFAULT_STEPS = 4096

BOUNDED_STABLE = "BOUNDED_STABLE"
MARGINAL = "MARGINAL"
UNBOUNDED = "UNBOUNDED"


def default_steps():
    """Integrator steps per period; ``LYACERT_STEPS`` overrides the default."""
    raw = os.environ.get("LYACERT_STEPS")
    if raw is None or raw.strip() == "":
        return DEFAULT_STEPS
    steps = int(raw)
    if steps < 8:
        raise DomainError("LYACERT_STEPS must be at least 8")
    return steps


# --- matrix-valued periodic functions ---------------------------------------------


class MatrixFunction:
    """A continuous T-periodic symmetric ``n x n`` matrix function.

    Parameters
    ----------
    func : callable
        ``func(t)`` with ``t`` a 1-d array returns an array of shape
        ``(len(t), n, n)``; for ``dim == 1`` shape ``(len(t),)`` is accepted.
        ``t`` is already reduced to ``[0, T)``.
    dim : int
    period : float
    sample_count : int
        Default resolution for sampled checks (norms, PSD tests, means).
    """

    def __init__(self, func, dim, period, sample_count=2048, source=None):
        if int(dim) < 1:
            raise DomainError("dim must be at least 1")
        if not float(period) > 0:
            raise DomainError("period must be positive")
        self._func = func
        self.dim = int(dim)
        self.period = float(period)
        self.sample_count = int(sample_count)
        # serializable description, when known: ("fourier", entries) or ("samples", array)
        self.source = source

    def __call__(self, t):
        t = np.asarray(t, dtype=float)
        scalar = t.ndim == 0
        tt = np.mod(np.atleast_1d(t).ravel(), self.period)
        out = np.asarray(self._func(tt), dtype=float)
        n = self.dim
        out = out.reshape(tt.size, n, n)
        out = 0.5 * (out + np.swapaxes(out, -1, -2))
        if scalar:
            return out[0]
        return out.reshape(t.shape + (n, n))

    def raw(self, t):
        """Evaluate without symmetrization (used by the symmetry check)."""
        tt = np.mod(np.atleast_1d(np.asarray(t, dtype=float)).ravel(), self.period)
        return np.asarray(self._func(tt), dtype=float).reshape(tt.size, self.dim, self.dim)

    # constructors

    @classmethod
    def constant(cls, matrix, period, **kw):
        m = np.atleast_2d(np.asarray(matrix, dtype=float))
        n = m.shape[0]
        return cls(lambda t: np.broadcast_to(m, (t.size, n, n)), n, period,
                   source=("fourier", {(i, j): [(m[i, j], 0.0, 0)] for i in range(n) for j in range(i, n)}), **kw)

    @classmethod
    def from_fourier(cls, entries, dim, period, **kw):
        """Entries ``{(i, j): [(cos_coeff, sin_coeff, harmonic), ...]}``, 0-based, upper triangle.

        ``q_ij(t) = sum a cos(2 pi k t / T) + b sin(2 pi k t / T)``; missing
        entries are zero and the lower triangle mirrors the upper one.
        """
        n = int(dim)
        T = float(period)
        clean = {}
        for (i, j), terms in entries.items():
            if i > j:
                i, j = j, i
            clean[(i, j)] = [(float(a), float(b), int(k)) for a, b, k in terms]

        def func(t):
            out = np.zeros((t.size, n, n))
            w = 2.0 * np.pi * t / T
            for (i, j), terms in clean.items():
                val = np.zeros(t.size)
                for a, b, k in terms:
                    val += a * np.cos(k * w) + b * np.sin(k * w)
                out[:, i, j] = val
                out[:, j, i] = val
            return out

        return cls(func, n, T, source=("fourier", clean), **kw)

    @classmethod
    def from_samples(cls, samples, period, **kw):
        """Periodic cubic spline through samples at ``t_j = j T / m``, ``j = 0..m-1``.

        ``samples`` has shape ``(m, n, n)``, or ``(m,)`` for a scalar.
        """
        s = np.asarray(samples, dtype=float)
        if s.ndim == 1:
            s = s[:, None, None]
        if s.ndim != 3 or s.shape[1] != s.shape[2]:
            raise DomainError("samples must have shape (m, n, n)")
        m, n, _ = s.shape
        if m < 4:
            raise DomainError("need at least 4 samples")
        s = 0.5 * (s + np.swapaxes(s, 1, 2))
        T = float(period)
        knots = np.linspace(0.0, T, m + 1)
        closed = np.concatenate([s, s[:1]], axis=0)
        spline = CubicSpline(knots, closed, axis=0, bc_type="periodic")
        return cls(spline, n, T, source=("samples", s), **kw)

    @classmethod
    def diagonal(cls, funcs, period, **kw):
        """Diagonal matrix function from scalar callables ``f_i(t) -> (len(t),)``."""
        funcs = list(funcs)
        n = len(funcs)

        def func(t):
            out = np.zeros((t.size, n, n))
            for i, f in enumerate(funcs):
                out[:, i, i] = np.broadcast_to(np.asarray(f(t), dtype=float), t.shape)
            return out

        return cls(func, n, period, **kw)

    @classmethod
    def block_diag(cls, blocks):
        """Direct sum of matrix functions sharing one period."""
        period = blocks[0].period
        if any(abs(b.period - period) > 1e-14 * period for b in blocks):
            raise DomainError("blocks must share a period")
        sizes = [b.dim for b in blocks]
        n = sum(sizes)

        def func(t):
            out = np.zeros((t.size, n, n))
            k = 0
            for b, d in zip(blocks, sizes):
                out[:, k:k + d, k:k + d] = b(t)
                k += d
            return out

        return cls(func, n, period, sample_count=max(b.sample_count for b in blocks))

    # derived functions

    def scaled(self, c):
        return MatrixFunction(lambda t: c * self(t), self.dim, self.period, self.sample_count)

    def __add__(self, other):
        if isinstance(other, MatrixFunction):
            if other.dim != self.dim:
                raise DomainError("dimension mismatch")
            return MatrixFunction(lambda t: self(t) + other(t), self.dim, self.period, self.sample_count)
        shift = np.asarray(other, dtype=float)
        return MatrixFunction(lambda t: self(t) + shift, self.dim, self.period, self.sample_count)

    def entry(self, i, j):
        """Scalar callable ``t -> q_ij(t)`` (0-based)."""
        return lambda t: self(np.asarray(t, dtype=float))[..., i, j]

    def nodes(self, count=None):
        """Uniform nodes ``t_j = j T / count``, ``j = 0..count-1``."""
        count = self.sample_count if count is None else int(count)
        return np.arange(count) * (self.period / count)

    def samples(self, count=None):
        t = self.nodes(count)
        return t, self(t)

    def mean(self, panels=None):
        """``(1/T) int_0^T Q`` by composite Simpson on an even number of panels."""
        panels = self.sample_count if panels is None else int(panels)
        panels += panels % 2
        t = np.linspace(0.0, self.period, panels + 1)
        return integrate.simpson(self(t), x=t, axis=0) / self.period


# --- integration ------------------------------------------------------------------


def _half_step_values(Q, t0, h, steps):
    """Q at ``t0 + j h/2`` for ``j = 0..2 steps``."""
    t = t0 + 0.5 * h * np.arange(2 * steps + 1)
    return Q(t)


def _rk4_step_matrices(Qh, h, mu=1.0):
    """RK4 step matrices for ``y' = S y``; ``Qh`` from :func:`_half_step_values`.

    ``mu`` may be an array; the result then has a leading batch axis.
    """
    n = Qh.shape[-1]
    mu = np.asarray(mu, dtype=float)
    batch = mu.shape
    q0 = Qh[0:-1:2]
    q1 = Qh[1::2]
    q2 = Qh[2::2]
    steps = q0.shape[0]
    # With S = [[0, I], [A, 0]] and A = -mu q, the four RK4 stages collapse to
    # closed block formulas; only q1 q0 and q2 q1 need matrix products.
    p10 = q1 @ q0
    p21 = q2 @ q1
    m = -mu.reshape(batch + (1, 1, 1))
    m2 = mu.reshape(batch + (1, 1, 1)) ** 2
    eye = np.eye(n)
    R = np.empty(batch + (steps, 2 * n, 2 * n))
    R[..., :n, :n] = eye + (h * h / 6.0) * m * (q0 + 2.0 * q1) + (h**4 / 24.0) * m2 * p10
    R[..., :n, n:] = h * eye + (h**3 / 6.0) * m * q1
    R[..., n:, :n] = (h / 6.0) * m * (q0 + 4.0 * q1 + q2) + (h**3 / 12.0) * m2 * (p10 + p21)
    R[..., n:, n:] = eye + (h * h / 6.0) * m * (2.0 * q1 + q2) + (h**4 / 24.0) * m2 * p21
    return R


def _ordered_product(R):
    """``R[-1] @ ... @ R[0]`` along axis -3, by pairwise reduction."""
    while R.shape[-3] > 1:
        tail = None
        if R.shape[-3] % 2:
            tail = R[..., -1:, :, :]
            R = R[..., :-1, :, :]
        R = R[..., 1::2, :, :] @ R[..., 0::2, :, :]
        if tail is not None:
            R = np.concatenate([R, tail], axis=-3)
    return R[..., 0, :, :]


def _steps_for(Q, t0, t1, steps):
    per_period = default_steps() if steps is None else int(steps)
    span = t1 - t0
    count = max(1, int(math.ceil(span / Q.period * per_period - 1e-9)))
    return count, span / count


def propagate(Q, t0, t1, state, steps=None):
    """State at ``t1`` of ``u'' = -Q(t) u`` started from ``state = (u, u')`` at ``t0``.

    ``steps`` is the number of RK4 steps per period (the actual step is
    adjusted so that ``[t0, t1]`` is covered exactly). ``state`` may be a
    ``2n`` vector or a ``2n x k`` matrix of states.
    """
    t0, t1 = float(t0), float(t1)
    if t1 < t0:
        raise DomainError("propagate needs t1 >= t0")
    state = np.asarray(state, dtype=float)
    if state.shape[0] != 2 * Q.dim:
        raise DomainError("state must have length 2n")
    if t1 == t0:
        return state.copy()
    count, h = _steps_for(Q, t0, t1, steps)
    R = _rk4_step_matrices(_half_step_values(Q, t0, h, count), h)
    out = _ordered_product(R) @ state
    if not np.all(np.isfinite(out)):
        raise FloatingPointError("state overflowed during propagation")
    return out


def monodromy(Q, steps=None, mu=1.0):
    """Monodromy of ``u'' + mu Q(t) u = 0`` over one period.

    ``mu`` may be an array, giving a stack of monodromies.
    """
    steps = default_steps() if steps is None else int(steps)
    h = Q.period / steps
    Qh = _half_step_values(Q, 0.0, h, steps)
    mu = np.asarray(mu, dtype=float)
    if mu.ndim == 0:
        return _ordered_product(_rk4_step_matrices(Qh, h, mu))
    out = np.empty((mu.size, 2 * Q.dim, 2 * Q.dim))
    # bound the working set to roughly 2^22 matrix entries per chunk
    chunk = max(1, (1 << 22) // (steps * 4 * Q.dim * Q.dim))
    for start in range(0, mu.size, chunk):
        part = mu[start:start + chunk]
        out[start:start + part.size] = _ordered_product(_rk4_step_matrices(Qh, h, part))
    return out


# --- Floquet analysis ---------------------------------------------------------------


@dataclass
class FloquetReport:
    monodromy: np.ndarray
    multipliers: np.ndarray
    verdict: str
    unit_circle_margin: float
    min_separation: float
    det_error: float

    @property
    def symmetry_defect(self):
        return multiplier_symmetry_defect(self.multipliers)

    @property
    def trace(self):
        return float(np.trace(self.monodromy))


def multiplier_symmetry_defect(multipliers):
    """Largest distance from ``conj(l)`` and ``1/l`` to the multiplier set."""
    lam = np.asarray(multipliers, dtype=complex)
    worst = 0.0
    for z in lam:
        for image in (np.conj(z), 1.0 / z):
            worst = max(worst, float(np.min(np.abs(lam - image))))
    return worst


def floquet(Q, steps=None, tol_mag=1e-6, tol_sep=1e-6, mu=1.0):
    """Floquet multipliers of ``u'' + Q u = 0`` and a boundedness verdict.

    UNBOUNDED if some multiplier is off the unit circle by more than
    ``tol_mag``; BOUNDED_STABLE if all are on it and pairwise separated by
    more than ``tol_sep``; MARGINAL otherwise (repeated multipliers on the
    circle, where multipliers alone cannot decide boundedness).
    """
    M = monodromy(Q, steps, mu)
    lam = np.linalg.eigvals(M)
    margin = float(np.max(np.abs(np.abs(lam) - 1.0)))
    diffs = np.abs(lam[:, None] - lam[None, :])
    diffs[np.diag_indices_from(diffs)] = np.inf
    sep = float(np.min(diffs)) if lam.size > 1 else math.inf
    if margin > tol_mag:
        verdict = UNBOUNDED
    elif sep > tol_sep:
        verdict = BOUNDED_STABLE
    else:
        verdict = MARGINAL
    return FloquetReport(M, lam, verdict, margin, sep, abs(float(np.linalg.det(M)) - 1.0))


# --- antiperiodic eigenvalue lambda_1 -------------------------------------------------


@dataclass
class EigenReport:
    lambda1: float
    bracketing_interval: tuple
    shooting_determinant_values: list = field(default_factory=list)
    rayleigh_estimate: float = None
    root_kind: str = "sign_change"


def _indicators(Q, mus, steps):
    """``det(M + I)`` and ``sigma_min(M + I) / (1 + sigma_max(M))`` for each mu."""
    M = monodromy(Q, steps, np.atleast_1d(mus))
    A = M + np.eye(M.shape[-1])
    det = np.linalg.det(A)
    sa = np.linalg.svd(A, compute_uv=False)
    sm = np.linalg.svd(M, compute_uv=False)
    return det, sa[..., -1] / (1.0 + sm[..., 0])


def _scan_upper(Q):
    # Testing with y = e cos(pi (t - s) / T), e the top eigenvector of mean(Q),
    # and averaging over s gives lambda_1 <= pi^2 / (T^2 top); 8x leaves room.
    top = float(np.max(np.linalg.eigvalsh(Q.mean())))
    if top > 1e-12:
        return 8.0 * math.pi**2 / (Q.period**2 * top)
    # zero mean: lambda_1 is driven by second-order effects and can be large
    peak = float(np.max(np.abs(np.linalg.eigvalsh(Q(Q.nodes()))))) or 1.0
    return 1e3 * math.pi**2 / (Q.period**2 * peak)


def lambda1_shooting(Q, steps=None, mu_min=1e-4, mu_max=None, ratio=1.05,
                     rel_tol=1e-10, touch_tol=1e-8, with_rayleigh=False, rayleigh_cells=512):
    """Smallest ``mu > 0`` for which ``u'' + mu Q u = 0`` has an antiperiodic solution.

    The scan runs over a geometric grid ``mu_min .. mu_max`` (ratio
    ``ratio``). A sign change of ``det(M(mu) + I)`` is refined by Brent's
    bracketing method to relative width ``rel_tol``. Roots of even
    multiplicity (constant coefficients have them: the multiplier pair
    touches -1 without crossing) show up as local minima of the scaled
    smallest singular value of ``M + I``; those are refined by
    golden-section search and accepted when the minimum is below
    ``touch_tol``. The grid is refined 4x once before giving up.

    Raises
    ------
    NotFoundError
        No root in the scanned range; ``diagnostics`` holds the scan.
    """
    T = Q.period
    if mu_max is None:
        mu_max = _scan_upper(Q)
    mu_max = max(float(mu_max), 10.0 * mu_min)

    def det_at(mu):
        return float(_indicators(Q, mu, steps)[0][0])

    def touch_at(mu):
        return float(_indicators(Q, mu, steps)[1][0])

    def refine_sign(a, b, da):
        root = optimize.brentq(det_at, a, b, xtol=rel_tol * a * 0.5, rtol=1e-15, maxiter=200)
        width = rel_tol * root
        return root, (root - width, root + width)

    diag = []
    for refinement in (1, 4):
        count = int(math.ceil(math.log(mu_max / mu_min) / math.log(ratio))) * refinement + 1
        mus = np.geomspace(mu_min, mu_max, count)
        det, touch = _indicators(Q, mus, steps)
        diag = list(zip(mus.tolist(), det.tolist(), touch.tolist()))
        for i in range(count - 1):
            if det[i] == 0.0:
                return EigenReport(float(mus[i]), (float(mus[i]), float(mus[i])), diag)
            if np.sign(det[i]) != np.sign(det[i + 1]):
                root, bracket = refine_sign(mus[i], mus[i + 1], det[i])
                return _finish(Q, root, bracket, diag, "sign_change", with_rayleigh, rayleigh_cells)
            j = i + 1
            if j + 1 < count and touch[j] <= touch[i] and touch[j] <= touch[j + 1]:
                lo, hi = mus[i], mus[j + 1]
                cand, fmin = golden_section(touch_at, lo, hi, rel_tol * lo * 0.01)
                if fmin <= touch_tol:
                    # a narrow instability interval may hide a sign change left of cand
                    probe = cand * (1.0 - 1e-9)
                    if np.sign(det_at(probe)) != np.sign(det[i]) and probe > lo:
                        root, bracket = refine_sign(lo, probe, det[i])
                        return _finish(Q, root, bracket, diag, "sign_change", with_rayleigh, rayleigh_cells)
                    width = rel_tol * cand
                    return _finish(Q, cand, (cand - width, cand + width), diag, "touch",
                                   with_rayleigh, rayleigh_cells)
    raise NotFoundError(
        f"no antiperiodic eigenvalue in [{mu_min:.3g}, {mu_max:.3g}]",
        {"mu_min": mu_min, "mu_max": mu_max, "scan": diag},
    )


def golden_section(f, a, b, xtol, max_iter=400):
    """Minimize a unimodal ``f`` on ``[a, b]`` by golden-section search.

    Unlike Brent's method this has no ``sqrt(eps)`` relative floor, which
    matters for V-shaped minima located to ~1e-12 relative.
    """
    invphi = (math.sqrt(5.0) - 1.0) / 2.0
    c = b - invphi * (b - a)
    d = a + invphi * (b - a)
    fc, fd = f(c), f(d)
    for _ in range(max_iter):
        if b - a <= xtol:
            break
        if fc <= fd:
            b, d, fd = d, c, fc
            c = b - invphi * (b - a)
            fc = f(c)
        else:
            a, c, fc = c, d, fd
            d = a + invphi * (b - a)
            fd = f(d)
    return (c, fc) if fc <= fd else (d, fd)


def _finish(Q, root, bracket, diag, kind, with_rayleigh, cells):
    est = rayleigh_lambda1(Q, cells) if with_rayleigh else None
    return EigenReport(float(root), (float(bracket[0]), float(bracket[1])), diag, est, kind)


def rayleigh_lambda1(Q, N=512):
    """Discrete maximum of ``int <Q y, y>`` over antiperiodic ``y`` with ``sum int y_i'^2 = 1``.

    Approximates ``1 / lambda_1``: piecewise-linear ``y`` on ``N`` cells,
    trapezoid rule for the weight. Returns the largest generalized
    eigenvalue of ``(W, K)``.
    """
    N = int(N)
    n = Q.dim
    h = Q.period / N
    t = np.arange(N) * h
    Qs = Q(t)
    # antiperiodic stiffness for one component; the wrap carries a sign flip
    k1 = np.zeros((N, N))
    idx = np.arange(N)
    k1[idx, idx] = 2.0 / h
    k1[idx[:-1], idx[:-1] + 1] = -1.0 / h
    k1[idx[:-1] + 1, idx[:-1]] = -1.0 / h
    k1[0, N - 1] = k1[N - 1, 0] = 1.0 / h
    K = np.kron(np.eye(n), k1)
    W = np.zeros((n * N, n * N))
    for i in range(n):
        for j in range(n):
            W[i * N + idx, j * N + idx] = h * Qs[:, i, j]
    top = linalg.eigh(W, K, eigvals_only=True, subset_by_index=[n * N - 1, n * N - 1])
    return float(top[0])


# --- periodic linear boundary value problem --------------------------------------------


@dataclass
class PeriodicSolution:
    """Grid-sampled T-periodic solution on ``t_k = k T / N``, ``k = 0..N``."""

    t: np.ndarray
    samples: np.ndarray
    derivative_samples: np.ndarray
    residual_sup: float
    bc_mismatch: float
    converged: bool = True
    phase: str = "linear"
    iterations: int = 1
    history: list = field(default_factory=list)
    warnings: list = field(default_factory=list)

    @property
    def period(self):
        return float(self.t[-1])

    @property
    def dim(self):
        return self.samples.shape[1]


def as_vector_function(g, dim, period):
    """Normalize a forcing term to a callable ``t -> (len(t), n)``.

    Accepts a callable, or an array of samples ``(m,)``/``(m, n)`` at
    ``t_j = j T / m`` which is interpolated by a periodic cubic spline.
    """
    if callable(g):
        def func(t):
            t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), period)
            return np.asarray(g(t), dtype=float).reshape(t.size, dim)
        return func
    s = np.asarray(g, dtype=float)
    if s.ndim == 1:
        s = s[:, None]
    if s.shape[1] != dim:
        raise DomainError("forcing samples must have n columns")
    m = s.shape[0]
    knots = np.linspace(0.0, period, m + 1)
    spline = CubicSpline(knots, np.concatenate([s, s[:1]]), axis=0, bc_type="periodic")

    def func(t):
        t = np.mod(np.atleast_1d(np.asarray(t, dtype=float)), period)
        return spline(t).reshape(t.size, dim)

    return func


def second_derivative(samples, h, order=4):
    """Periodic finite-difference ``u''`` at the nodes of a closed grid ``(N+1, n)``."""
    u = np.asarray(samples)[:-1]
    if order == 2:
        d2 = (np.roll(u, -1, 0) - 2.0 * u + np.roll(u, 1, 0)) / h**2
    elif order == 4:
        d2 = (-np.roll(u, -2, 0) + 16.0 * np.roll(u, -1, 0) - 30.0 * u
              + 16.0 * np.roll(u, 1, 0) - np.roll(u, 2, 0)) / (12.0 * h**2)
    else:
        raise DomainError("order must be 2 or 4")
    return np.concatenate([d2, d2[:1]])


def solve_linear_periodic(C, g, steps=None, singular_tol=1e-10):
    """Solve ``u'' + C(t) u = g(t)`` with ``u(0) = u(T)``, ``u'(0) = u'(T)``.

    The affine RK4 step maps are composed over one period into
    ``y(T) = M y(0) + c``; the periodic initial state solves
    ``(I - M) y0 = c`` and is then integrated across the grid.

    Raises
    ------
    ResonantLinearError
        If ``sigma_min(I - M) / max(1, sigma_max(I - M)) < singular_tol``, i.e. the
        homogeneous problem has (numerically) nontrivial periodic solutions.
    """
    n = C.dim
    T = C.period
    steps = default_steps() if steps is None else int(steps)
    h = T / steps
    gf = as_vector_function(g, n, T)
    th = 0.5 * h * np.arange(2 * steps + 1)
    Ch = C(th)
    gh = gf(th)
    # augmented state (u, u', 1)
    A = np.zeros((2 * steps + 1, 2 * n + 1, 2 * n + 1))
    A[:, :n, n:2 * n] = np.eye(n)
    A[:, n:2 * n, :n] = -Ch
    A[:, n:2 * n, 2 * n] = gh
    a0, a1, a2 = A[0:-1:2], A[1::2], A[2::2]
    eye = np.eye(2 * n + 1)
    k1 = a0
    k2 = a1 @ (eye + 0.5 * h * k1)
    k3 = a1 @ (eye + 0.5 * h * k2)
    k4 = a2 @ (eye + h * k3)
    R = eye + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
    full = _ordered_product(R)
    M = full[:2 * n, :2 * n]
    c = full[:2 * n, 2 * n]
    L = np.eye(2 * n) - M
    sv = np.linalg.svd(L, compute_uv=False)
    # scale floor of 1: when I - M is tiny everywhere (C = (2 pi k / T)^2),
    # a plain condition-number test would see a well-conditioned matrix
    ratio = sv[-1] / max(1.0, sv[0])
    if ratio < singular_tol:
        raise ResonantLinearError(
            f"homogeneous periodic problem is resonant (sigma_min/sigma_max = {ratio:.3e})",
            sigma_min=float(ratio),
        )
    y0 = np.linalg.solve(L, c)
    states = np.empty((steps + 1, 2 * n + 1))
    states[0] = np.append(y0, 1.0)
    for k in range(steps):
        states[k + 1] = R[k] @ states[k]
    u = states[:, :n]
    du = states[:, n:2 * n]
    t = np.linspace(0.0, T, steps + 1)
    Cn = Ch[0::2]
    gn = gh[0::2]
    res = second_derivative(u, h) + np.einsum("kij,kj->ki", Cn, u) - gn
    mismatch = float(np.max(np.abs(u[-1] - u[0])) + np.max(np.abs(du[-1] - du[0])))
    return PeriodicSolution(t, u, du, float(np.max(np.abs(res))), mismatch)


def trajectory(Q, state, steps=None):
    """States ``(u, u')`` at the ``steps + 1`` nodes of one period from ``state`` at t=0."""
    steps = default_steps() if steps is None else int(steps)
    h = Q.period / steps
    R = _rk4_step_matrices(_half_step_values(Q, 0.0, h, steps), h)
    out = np.empty((steps + 1, 2 * Q.dim))
    out[0] = state
    for k in range(steps):
        out[k + 1] = R[k] @ out[k]
    return np.linspace(0.0, Q.period, steps + 1), out


def periodic_null_vector(M):
    """Right singular vector of ``I - M`` for the smallest singular value."""
    L = np.eye(M.shape[0]) - M
    _, s, vt = np.linalg.svd(L)
    return vt[-1], float(s[-1])
