"""Periodic solutions of ``u'' + G_u(t, u) = h(t)`` when the Hessian of ``G``
crosses eigenvalues of the periodic problem.

If ``A(t) <= G_uu(t, u) <= B(t)`` with ``B`` diagonal, the mean of ``A``
positive definite and ``||b_ii^+||_{p_i} < beta^per_{p_i}(T)``, the problem
has exactly one T-periodic solution. The existence argument writes
``G_u(t, u) - G_u(t, 0) = D(t, u) u`` with the averaged Hessian
``D(t, z) = int_0^1 G_uu(t, theta z) dtheta`` and looks for a fixed point of
``y -> u_y``, where ``u_y'' + D(t, y) u_y = h - G_u(t, 0)``. That map is what
:func:`solve_resonant` iterates, with damping and a Newton fallback since
plain iteration is not guaranteed to converge.
"""

import math
from dataclasses import dataclass, field

import numpy as np

from . import linear_engine as le
from .certifier import positive_part_norm, _passes
from .constants import PExponent, beta
from .errors import DomainError, NonConvergedError, PreconditionError, ResonantLinearError
from .grid import PERIODIC

RHO_FLOOR = 1.0 / 16.0


@dataclass
class NonlinearProblem:
    """``u'' + G_u(t, u) = h`` data.

    ``grad(t, u)`` and ``hess(t, u)`` are vectorized: ``t`` has shape
    ``(m,)``, ``u`` shape ``(m, n)``; they return ``(m, n)`` and
    ``(m, n, n)``. ``lower``/``upper`` are the bounds ``A(t)`` and the
    diagonal ``B(t)``; ``exponents`` holds one exponent per component.
    """

    dim: int
    period: float
    grad: object
    hess: object
    lower: object = None
    upper: object = None
    exponents: list = None
    name: str = ""

    def __post_init__(self):
        if self.dim < 1 or not self.period > 0:
            raise DomainError("need dim >= 1 and period > 0")
        if self.exponents is not None:
            self.exponents = [PExponent.parse(p) for p in self.exponents]

    def grad_at(self, t, u):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = np.asarray(u, dtype=float).reshape(t.size, self.dim)
        return np.asarray(self.grad(t, u), dtype=float).reshape(t.size, self.dim)

    def hess_at(self, t, u):
        t = np.atleast_1d(np.asarray(t, dtype=float))
        u = np.asarray(u, dtype=float).reshape(t.size, self.dim)
        return np.asarray(self.hess(t, u), dtype=float).reshape(t.size, self.dim, self.dim)


def probe_points(prob, t_count=64, u_box=(-5.0, 5.0), u_count=9, seed=0):
    """Deterministic ``(t, u)`` probes: a time grid times a set of states.

    States are the origin, points along each axis, and uniform random
    points in the box.
    """
    lo, hi = u_box
    n = prob.dim
    states = [np.zeros(n)]
    for i in range(n):
        for v in np.linspace(lo, hi, u_count):
            e = np.zeros(n)
            e[i] = v
            states.append(e)
    rng = np.random.default_rng(seed)
    states.extend(rng.uniform(lo, hi, size=(u_count * n, n)))
    U = np.array(states)
    t = np.arange(t_count) * (prob.period / t_count)
    tt = np.repeat(t, U.shape[0])
    uu = np.tile(U, (t_count, 1))
    return tt, uu


def check_consistency(prob, t_count=16, seed=1, step=1e-5):
    """Symmetry of ``hess`` and agreement of ``grad`` with ``hess`` by central differences.

    Returns ``(max asymmetry, max relative finite-difference error)``.
    """
    t, u = probe_points(prob, t_count, (-2.0, 2.0), 3, seed)
    H = prob.hess_at(t, u)
    asym = float(np.max(np.abs(H - np.swapaxes(H, 1, 2))))
    worst = 0.0
    for i in range(prob.dim):
        e = np.zeros(prob.dim)
        e[i] = step
        fd = (prob.grad_at(t, u + e) - prob.grad_at(t, u - e)) / (2.0 * step)
        err = np.abs(fd - H[:, :, i]) / (1.0 + np.abs(H[:, :, i]))
        worst = max(worst, float(np.max(err)))
    return asym, worst


@dataclass
class HypothesisReport:
    passed: bool
    sandwich_ok: bool
    mean_lower_ok: bool
    norms_ok: bool
    min_lower_gap: float
    min_upper_gap: float
    mean_lower_min_eigenvalue: float
    exponents: list
    norms: list
    constants: list
    margins: list
    boundary_case: bool = False
    probe_count: int = 0
    note: str = ("sampled evidence: the matrix inequalities were checked at finitely many "
                 "(t, u) probe points, not proven for all u")

    def summary(self):
        return {
            "passed": self.passed,
            "sandwich_ok": self.sandwich_ok,
            "mean_lower_ok": self.mean_lower_ok,
            "norms_ok": self.norms_ok,
            "min_lower_gap": self.min_lower_gap,
            "min_upper_gap": self.min_upper_gap,
            "mean_lower_min_eigenvalue": self.mean_lower_min_eigenvalue,
            "exponents": [str(p) for p in self.exponents],
            "norms": self.norms,
            "constants": self.constants,
            "margins": self.margins,
            "boundary_case": self.boundary_case,
            "probe_count": self.probe_count,
            "note": self.note,
        }


def check_t1_hypotheses(prob, t_count=64, u_box=(-5.0, 5.0), u_count=9, seed=0, tol=1e-9, panels=2048):
    """Sampled check of ``A <= G_uu <= B``, ``mean(A) > 0`` and the L^p bounds on ``b_ii``."""
    if prob.lower is None or prob.upper is None:
        raise PreconditionError("hypothesis check needs bounds A(t) and B(t)")
    if prob.exponents is None or len(prob.exponents) != prob.dim:
        raise PreconditionError("hypothesis check needs one exponent per component")
    A, B = prob.lower, prob.upper
    t, u = probe_points(prob, t_count, u_box, u_count, seed)
    H = prob.hess_at(t, u)
    lower_gap = float(np.min(np.linalg.eigvalsh(H - A(t))))
    upper_gap = float(np.min(np.linalg.eigvalsh(B(t) - H)))
    sandwich = lower_gap >= -tol and upper_gap >= -tol
    mean_eig = float(np.min(np.linalg.eigvalsh(A.mean(panels))))
    mean_ok = mean_eig > 1e-10
    T = prob.period
    tg = np.linspace(0.0, T, panels + 1)
    Bt = B(tg)
    norms, consts, margins = [], [], []
    norms_ok, boundary = True, False
    for i, p in enumerate(prob.exponents):
        nrm = positive_part_norm(Bt[:, i, i], T, p)
        b = beta(PERIODIC, p, T)
        norms.append(nrm)
        consts.append(b)
        margins.append(b - nrm)
        norms_ok = norms_ok and _passes(b - nrm, b, p)
        if p.is_one and abs(b - nrm) <= 1e-9 * b:
            boundary = True
    return HypothesisReport(sandwich and mean_ok and norms_ok, sandwich, mean_ok, norms_ok,
                            lower_gap, upper_gap, mean_eig, list(prob.exponents), norms, consts,
                            margins, boundary, int(t.size))


def averaged_hessian(prob, t, z, quad_points=8):
    """``int_0^1 G_uu(t, theta z) dtheta`` by Gauss-Legendre, vectorized over nodes.

    ``t`` has shape ``(m,)``, ``z`` shape ``(m, n)``; returns ``(m, n, n)``.
    """
    if quad_points < 4:
        raise DomainError("quad_points must be at least 4")
    t = np.atleast_1d(np.asarray(t, dtype=float))
    z = np.asarray(z, dtype=float).reshape(t.size, prob.dim)
    x, w = np.polynomial.legendre.leggauss(int(quad_points))
    theta = 0.5 * (x + 1.0)
    w = 0.5 * w
    m = t.size
    tt = np.tile(t, theta.size)
    zz = (theta[:, None, None] * z[None]).reshape(theta.size * m, prob.dim)
    H = prob.hess_at(tt, zz).reshape(theta.size, m, prob.dim, prob.dim)
    D = np.einsum("q,qmij->mij", w, H)
    return 0.5 * (D + np.swapaxes(D, 1, 2))


def _forcing_values(forcing, dim, period, t):
    if forcing is None:
        return np.zeros((t.size, dim))
    return le.as_vector_function(forcing, dim, period)(t)


def residual(prob, forcing, u, order=4):
    """Sup over nodes of ``|u'' + G_u(t, u) - h|`` plus boundary mismatch.

    ``u`` is a :class:`~lyacert.linear_engine.PeriodicSolution` or a closed
    grid array ``(N+1, n)``. ``u''`` is a periodic finite difference
    (``order`` 2 or 4).
    """
    if isinstance(u, le.PeriodicSolution):
        samples, deriv = u.samples, u.derivative_samples
    else:
        samples, deriv = np.asarray(u, dtype=float), None
    samples = samples.reshape(samples.shape[0], prob.dim)
    N = samples.shape[0] - 1
    h = prob.period / N
    t = np.linspace(0.0, prob.period, N + 1)
    d2 = le.second_derivative(samples, h, order)
    r = d2 + prob.grad_at(t, samples) - _forcing_values(forcing, prob.dim, prob.period, t)
    mismatch = float(np.max(np.abs(samples[-1] - samples[0])))
    if deriv is not None:
        mismatch += float(np.max(np.abs(deriv[-1] - deriv[0])))
    return float(np.max(np.abs(r[:-1]))) + mismatch


def _initial_samples(init, prob, steps):
    if init is None:
        return np.zeros((steps + 1, prob.dim))
    arr = init.samples if isinstance(init, le.PeriodicSolution) else np.asarray(init, dtype=float)
    arr = arr.reshape(arr.shape[0], prob.dim)
    if arr.shape[0] == steps + 1:
        return arr.copy()
    # resample a guess given on another grid
    src = np.linspace(0.0, prob.period, arr.shape[0])
    dst = np.linspace(0.0, prob.period, steps + 1)
    return np.stack([np.interp(dst, src, arr[:, i]) for i in range(prob.dim)], axis=1)


def _sampled_matrix(values, period):
    return le.MatrixFunction.from_samples(values[:-1], period)


def solve_resonant(prob, forcing=None, init=None, tol=1e-9, max_outer=200, steps=None,
                   force=False, quad_points=8, newton_max=30, check_kwargs=None):
    """Periodic solution of ``u'' + G_u(t, u) = h`` by damped fixed-point iteration.

    Each outer step solves the linear periodic problem with ``C = D(t, y)``
    and ``g = h - G_u(t, 0)``, then moves ``y`` a fraction ``rho`` toward
    the result. ``rho`` starts at 1 and halves (down to 1/16) whenever the
    residual would grow. After ``max_outer`` steps without convergence a
    Newton iteration takes over from the best iterate.

    Convergence means the full fixed-point step ``||H(y) - y||`` is below
    ``tol`` and the finite-difference residual is below
    ``max(10 tol, 1e-6 (1 + ||h||))``; the second term is the accuracy the
    linear solver guarantees, which the difference stencil cannot beat on
    fine grids.

    Unless ``force`` is set, :func:`check_t1_hypotheses` must pass first;
    with ``force`` a failed or impossible check becomes a warning.

    Raises
    ------
    PreconditionError, ResonantLinearError, NonConvergedError
    """
    warnings = []
    report = None
    try:
        report = check_t1_hypotheses(prob, **(check_kwargs or {}))
    except PreconditionError as exc:
        if not force:
            raise
        warnings.append(f"hypotheses not checked: {exc}")
    if report is not None and not report.passed:
        if not force:
            err = PreconditionError("nonresonance hypotheses fail on the probe set")
            err.report = report
            raise err
        warnings.append("hypotheses failed on the probe set; solving anyway")
    if report is not None and report.boundary_case:
        warnings.append("p=1 component at the constant (boundary case)")

    n, T = prob.dim, prob.period
    steps = le.default_steps() if steps is None else int(steps)
    t = np.linspace(0.0, T, steps + 1)
    h_nodes = _forcing_values(forcing, n, T, t)
    h_sup = float(np.max(np.abs(h_nodes))) if forcing is not None else 0.0
    res_target = max(10.0 * tol, 1e-6 * (1.0 + h_sup))
    bound = 1e3 * (1.0 + h_sup)

    hfun = None if forcing is None else le.as_vector_function(forcing, n, T)

    def g_const(tq):
        tq = np.atleast_1d(tq)
        base = -prob.grad_at(tq, np.zeros((tq.size, n)))
        return base if hfun is None else base + hfun(tq)

    def apply_H(y):
        D = averaged_hessian(prob, t, y, quad_points)
        try:
            sol = le.solve_linear_periodic(_sampled_matrix(D, T), g_const, steps)
        except ResonantLinearError as exc:
            raise ResonantLinearError(
                "averaged-Hessian linearization is resonant along the iteration "
                "(hypotheses violated on the path)", exc.sigma_min, y.copy()) from exc
        return sol

    def res_of(y):
        return residual(prob, forcing, y)

    history = []
    y = _initial_samples(init, prob, steps)
    r_y = res_of(y)
    best = (r_y, y)
    rho = 1.0
    peak = float(np.max(np.abs(y)))
    for k in range(1, max_outer + 1):
        sol = apply_H(y)
        Hy = sol.samples
        step = float(np.max(np.abs(Hy - y)))
        history.append({"phase": "picard", "iteration": k, "step": step, "residual": r_y, "rho": rho})
        if step < tol and r_y < res_target:
            return _result(sol, y, prob, forcing, "picard", k, history, warnings, report)
        while True:
            cand = (1.0 - rho) * y + rho * Hy
            r_c = res_of(cand)
            if r_c <= r_y or rho <= RHO_FLOOR:
                break
            rho = max(RHO_FLOOR, 0.5 * rho)
        y, r_y = cand, r_c
        peak = max(peak, float(np.max(np.abs(y))))
        if r_y < best[0]:
            best = (r_y, y)
        if not np.all(np.isfinite(y)) or peak > bound:
            break

    # Newton: linearize G_u about y and solve for the next iterate directly
    y = best[1]
    for k in range(1, newton_max + 1):
        J = prob.hess_at(t, y)
        rhs = h_nodes - prob.grad_at(t, y) + np.einsum("kij,kj->ki", J, y)
        try:
            sol = le.solve_linear_periodic(_sampled_matrix(J, T), rhs[:-1], steps)
        except ResonantLinearError as exc:
            raise ResonantLinearError("Newton linearization is resonant", exc.sigma_min, y.copy()) from exc
        step = float(np.max(np.abs(sol.samples - y)))
        y = sol.samples
        r_y = res_of(y)
        history.append({"phase": "newton", "iteration": k, "step": step, "residual": r_y, "rho": 1.0})
        if r_y < best[0]:
            best = (r_y, y)
        if step < tol and r_y < res_target:
            final = apply_H(y)
            return _result(final, y, prob, forcing, "newton", k, history, warnings, report)
        if not np.all(np.isfinite(y)):
            break
    raise NonConvergedError("neither damped iteration nor Newton converged", history, best[1])


def _result(sol, y, prob, forcing, phase, iterations, history, warnings, report):
    """Package the final iterate; ``sol`` is ``H(y)``, which carries derivative samples."""
    out = le.PeriodicSolution(
        sol.t, sol.samples, sol.derivative_samples, residual(prob, forcing, sol),
        float(np.max(np.abs(sol.samples[-1] - sol.samples[0]))
              + np.max(np.abs(sol.derivative_samples[-1] - sol.derivative_samples[0]))),
        True, phase, iterations, history, warnings)
    out.fixed_point_defect = float(np.max(np.abs(sol.samples - y)))
    out.hypotheses = report
    return out


def logcosh_problem(M, c=None, weight=None, period=2.0 * math.pi, exponents=None, name="logcosh"):
    """``G(t, u) = m(t) [ <M u, u> / 2 + sum_i c_i log cosh u_i ]`` with derived bounds.

    ``weight`` is a nonnegative scalar callable ``m(t)`` (default 1).
    Since ``0 < sech^2 <= 1``, the Hessian ``m (M + diag(c_i sech^2 u_i))``
    lies between ``A = m (M + diag(min(c, 0)))`` and the Gershgorin
    diagonal ``B = m diag(M_ii + sum_{j != i} |M_ij| + max(c_i, 0))``.
    Missing exponents are chosen per component from the periodic ratio.
    """
    from .certifier import choose_exponents

    M = np.atleast_2d(np.asarray(M, dtype=float))
    n = M.shape[0]
    M = 0.5 * (M + M.T)
    c = np.zeros(n) if c is None else np.asarray(c, dtype=float).reshape(n)
    if weight is None:
        def weight(t):
            return np.ones(np.shape(t))
    T = float(period)

    def m_of(t):
        return np.asarray(weight(np.asarray(t, dtype=float)), dtype=float).reshape(np.size(t))

    def grad(t, u):
        return m_of(t)[:, None] * (u @ M + c * np.tanh(u))

    def hess(t, u):
        sech2 = 1.0 / np.cosh(u) ** 2
        return m_of(t)[:, None, None] * (M + (c * sech2)[:, :, None] * np.eye(n))

    lo = M + np.diag(np.minimum(c, 0.0))
    hi = np.diag(np.diag(M) + np.sum(np.abs(M), axis=1) - np.abs(np.diag(M)) + np.maximum(c, 0.0))
    lower = le.MatrixFunction(lambda t: m_of(t)[:, None, None] * lo, n, T)
    upper = le.MatrixFunction(lambda t: m_of(t)[:, None, None] * hi, n, T)
    if exponents is None:
        tg = np.linspace(0.0, T, 2049)
        w = m_of(tg)
        exponents = [choose_exponents(w * hi[i, i], T, bc=PERIODIC) for i in range(n)]
    return NonlinearProblem(n, T, grad, hess, lower, upper, exponents, name)
