"""Stability certificates for ``u'' + P(t) u = 0`` and witnesses of sharpness.

Three sufficient tests are offered. ``certify_thm41`` compares L^p norms of
the diagonal of a pointwise majorant ``B >= P`` with the antiperiodic
Lyapunov constants; ``certify_krein`` checks ``lambda_1 > 1``;
``certify_2d_example`` builds a tailored majorant for 2 x 2 systems whose
coupling is absorbed by a free constant ``gamma``. None of them ever claims
instability: a failed test is INCONCLUSIVE, and only the Floquet oracle in
:mod:`lyacert.linear_engine` says UNBOUNDED.

The witness generators go the other way. Given target norms ``gamma_i``
that exceed a constant, they produce explicit potentials with those norms
for which the conclusion fails, showing the constants cannot be enlarged.
"""

import math
from dataclasses import dataclass, field

import numpy as np
from scipy import integrate, optimize

from . import linear_engine as le
from .constants import PExponent, beta
from .errors import DomainError, MajorantInvalid, PreconditionError, WitnessNotFound
from .grid import ANTIPERIODIC, PERIODIC

LP_MAJORANT = "LP_MAJORANT"
KREIN_LAMBDA1 = "KREIN_LAMBDA1"
EXAMPLE_2D = "EXAMPLE_2D"

CERTIFIED = "CERTIFIED_STABLY_BOUNDED"
INCONCLUSIVE = "INCONCLUSIVE"

# relative margin demanded for strict inequalities, and slack for p = 1
STRICT_TOL = 1e-9
P1_SLACK = 1e-12
KREIN_TOL = 1e-6
MAJORANT_TOL = 1e-10

EXPONENT_GRID = (1.0, 1.25, 1.5, 2.0, 3.0, 5.0, 10.0, math.inf)

WITNESS_SAMPLES = 512
RAMP_FRACTION = 0.02


# --- norms ------------------------------------------------------------------------


def _closed_grid(T, panels):
    panels = int(panels) + int(panels) % 2
    return np.linspace(0.0, T, panels + 1)


def positive_part_norm(b, T, p, panels=2048):
    """``||b^+||_p`` over one period.

    ``b`` is a scalar callable or an array of values on a closed uniform
    grid (first and last node both included). Finite ``p`` uses composite
    Simpson; ``p = inf`` takes the maximum over the samples.
    """
    p = PExponent.parse(p)
    if callable(b):
        t = _closed_grid(T, panels)
        values = np.asarray(b(t), dtype=float).reshape(t.size)
    else:
        values = np.asarray(b, dtype=float)
        t = np.linspace(0.0, T, values.size)
    plus = np.maximum(values, 0.0)
    if p.is_infinity:
        return float(np.max(plus))
    if p.is_one:
        return float(integrate.simpson(plus, x=t))
    return float(integrate.simpson(plus**p.value, x=t)) ** (1.0 / p.value)


def _passes(margin, b, p):
    """Strict test for p in (1, inf], non-strict (with slack) for p = 1."""
    if p.is_one:
        return margin >= -P1_SLACK * max(1.0, b)
    return margin > STRICT_TOL * b


# --- membership in Lambda ------------------------------------------------------------


@dataclass
class LambdaMembership:
    symmetric_ok: bool
    mean_psd_ok: bool
    no_constant_solutions_ok: bool
    common_kernel_dim: int
    mean_min_eigenvalue: float = 0.0

    @property
    def member(self):
        return self.symmetric_ok and self.mean_psd_ok and self.no_constant_solutions_ok

    def failed_clauses(self):
        out = []
        if not self.symmetric_ok:
            out.append("Q(t) symmetric")
        if not self.mean_psd_ok:
            out.append("mean of Q positive semidefinite")
        if not self.no_constant_solutions_ok:
            out.append(f"no nontrivial constant solutions (common kernel dim {self.common_kernel_dim})")
        return out


def check_lambda_membership(Q, sample_count=None, tol=1e-10):
    """Decide (on samples) whether ``Q`` belongs to the class Lambda."""
    count = Q.sample_count if sample_count is None else int(sample_count)
    t = Q.nodes(count)
    raw = Q.raw(t)
    scale = max(1.0, float(np.max(np.abs(raw))))
    symmetric = bool(np.max(np.abs(raw - np.swapaxes(raw, 1, 2))) <= tol * scale)
    mean_eig = float(np.min(np.linalg.eigvalsh(Q.mean(count))))
    mean_ok = mean_eig >= -tol
    stacked = Q(t).reshape(-1, Q.dim)
    sv = np.linalg.svd(stacked, compute_uv=False)
    kernel = int(np.sum(sv < tol * max(1.0, sv[0]))) if sv.size else Q.dim
    return LambdaMembership(symmetric, mean_ok, kernel == 0, kernel, mean_eig)


def _require_member(Q):
    report = check_lambda_membership(Q)
    if not report.member:
        raise PreconditionError("potential is not in Lambda: " + "; ".join(report.failed_clauses()))
    return report


# --- majorants ---------------------------------------------------------------------


def gershgorin_majorant(Q):
    """Diagonal ``B`` with ``b_ii = q_ii + sum_{j != i} |q_ij|``."""

    def func(t):
        q = Q(t)
        off = np.sum(np.abs(q), axis=2) - np.abs(np.diagonal(q, axis1=1, axis2=2))
        d = np.diagonal(q, axis1=1, axis2=2) + off
        out = np.zeros_like(q)
        idx = np.arange(Q.dim)
        out[:, idx, idx] = d
        return out

    return le.MatrixFunction(func, Q.dim, Q.period, Q.sample_count)


def majorant_gap(P, B, sample_count=None):
    """Smallest eigenvalue of ``B(t) - P(t)`` over the sample nodes."""
    t = P.nodes(sample_count)
    return float(np.min(np.linalg.eigvalsh(B(t) - P(t))))


def _check_majorant(P, B):
    if B.dim != P.dim or abs(B.period - P.period) > 1e-12 * P.period:
        raise DomainError("majorant must match the potential's dimension and period")
    t = P.nodes()
    Bt = B(t)
    off = Bt - np.einsum("kii->ki", Bt)[:, :, None] * np.eye(P.dim)
    scale = max(1.0, float(np.max(np.abs(Bt))))
    if np.max(np.abs(off)) > MAJORANT_TOL * scale:
        raise MajorantInvalid("majorant must be diagonal")
    gap = float(np.min(np.linalg.eigvalsh(Bt - P(t))))
    if gap < -MAJORANT_TOL * scale:
        raise MajorantInvalid(f"P <= B fails at a sample (min eigenvalue of B - P = {gap:.3e})")
    return gap


# --- certificates -------------------------------------------------------------------


@dataclass
class Certificate:
    method: str
    verdict: str
    majorant: object = None
    exponents: list = field(default_factory=list)
    norms: list = field(default_factory=list)
    constants: list = field(default_factory=list)
    margins: list = field(default_factory=list)
    lambda1: float = None
    gamma: float = None
    boundary_case: bool = False
    majorant_gap: float = None
    notes: list = field(default_factory=list)

    @property
    def certified(self):
        return self.verdict == CERTIFIED

    @property
    def min_margin(self):
        return min(self.margins) if self.margins else None

    def summary(self):
        """Plain-dict view, convenient for JSON output."""
        return {
            "method": self.method,
            "verdict": self.verdict,
            "exponents": [str(p) for p in self.exponents],
            "norms": list(self.norms),
            "constants": list(self.constants),
            "margins": list(self.margins),
            "lambda1": self.lambda1,
            "gamma": self.gamma,
            "boundary_case": self.boundary_case,
            "majorant_gap": self.majorant_gap,
            "notes": list(self.notes),
        }


def choose_exponents(b, T, panels=2048, bc=ANTIPERIODIC):
    """Exponent from the fixed grid minimizing ``||b^+||_p / beta_p(T)``.

    Ties (within 1e-12 relative) go to the smaller exponent, so ``b = 0``
    yields ``p = 1``.
    """
    t = _closed_grid(T, panels)
    values = np.asarray(b(t), dtype=float) if callable(b) else np.asarray(b, dtype=float)
    best, best_ratio = None, math.inf
    for p in EXPONENT_GRID:
        ratio = positive_part_norm(values, T, p) / beta(bc, p, T)
        if best is None or ratio < best_ratio * (1.0 - 1e-12):
            best, best_ratio = PExponent.parse(p), ratio
    return best


def _lp_certificate(P, B, exponents, method, panels=2048, gap=None):
    T = P.period
    t = _closed_grid(T, panels)
    Bt = B(t)
    if exponents is None:
        exponents = [choose_exponents(Bt[:, i, i], T) for i in range(P.dim)]
    else:
        exponents = [PExponent.parse(p) for p in exponents]
        if len(exponents) != P.dim:
            raise DomainError("need one exponent per component")
    norms, consts, margins = [], [], []
    ok, boundary = True, False
    for i, p in enumerate(exponents):
        nrm = positive_part_norm(Bt[:, i, i], T, p)
        b = beta(ANTIPERIODIC, p, T)
        margin = b - nrm
        norms.append(nrm)
        consts.append(b)
        margins.append(margin)
        ok = ok and _passes(margin, b, p)
        if p.is_one and abs(margin) <= STRICT_TOL * b:
            boundary = True
    cert = Certificate(method, CERTIFIED if ok else INCONCLUSIVE, B, exponents, norms, consts,
                       margins, boundary_case=boundary and ok, majorant_gap=gap)
    if cert.boundary_case:
        cert.notes.append("p=1 component attains the constant up to tolerance (boundary case)")
    return cert


def certify_thm41(P, B=None, exponents=None, panels=2048):
    """L^p majorant test: certified when every ``||b_ii^+||_{p_i}`` is below ``beta^ant``.

    ``B`` defaults to :func:`gershgorin_majorant`. A supplied ``B`` must be
    diagonal and satisfy ``P <= B`` at every sample, otherwise
    :class:`MajorantInvalid` is raised.
    """
    _require_member(P)
    if B is None:
        B = gershgorin_majorant(P)
    gap = _check_majorant(P, B)
    return _lp_certificate(P, B, exponents, LP_MAJORANT, panels, gap)


def certify_krein(Q, steps=None):
    """Certified when the antiperiodic eigenvalue ``lambda_1`` exceeds ``1 + 1e-6``."""
    _require_member(Q)
    rep = le.lambda1_shooting(Q, steps)
    ok = rep.lambda1 > 1.0 + KREIN_TOL
    cert = Certificate(KREIN_LAMBDA1, CERTIFIED if ok else INCONCLUSIVE, lambda1=rep.lambda1)
    cert.notes.append(f"lambda_1 root kind: {rep.root_kind}")
    return cert


# --- 2 x 2 construction -------------------------------------------------------------------


def _check_sign_conditions(P, tol=1e-12):
    if P.dim != 2:
        raise DomainError("certify_2d_example needs a 2 x 2 potential")
    t = P.nodes()
    q = P(t)
    scale = max(1.0, float(np.max(np.abs(q))))
    det = q[:, 0, 0] * q[:, 1, 1] - q[:, 0, 1] ** 2
    if np.min(q[:, 0, 0]) < -tol * scale:
        raise PreconditionError("2 x 2 sign condition violated: p11(t) >= 0")
    if np.min(q[:, 1, 1]) < -tol * scale:
        raise PreconditionError("2 x 2 sign condition violated: p22(t) >= 0")
    if np.min(det) < -tol * scale**2:
        raise PreconditionError("2 x 2 sign condition violated: det P(t) >= 0")
    if np.max(det) <= tol * scale**2:
        raise PreconditionError("2 x 2 sign condition violated: det P is not identically zero")


def _pair_attempt(P, p1, p2, panels):
    """Best gamma for one exponent pair; returns ``(min margin, gamma, notes)``."""
    T = P.period
    t = _closed_grid(T, panels)
    q = P(t)
    p11, p22, p12sq = q[:, 0, 0], q[:, 1, 1], q[:, 0, 1] ** 2
    b1, b2 = beta(ANTIPERIODIC, p1, T), beta(ANTIPERIODIC, p2, T)
    n1 = positive_part_norm(p11, T, p1)
    d1 = b1 - n1
    if not d1 > STRICT_TOL * b1:
        return None, None, [f"||p11||_{p1} = {n1:.6g} is not below beta = {b1:.6g}"]
    composite = positive_part_norm(p22 + p12sq / d1, T, p2)
    if not composite < b2 * (1.0 - STRICT_TOL):
        return None, None, [f"composite norm {composite:.6g} is not below beta = {b2:.6g}"]

    def margin(gamma):
        m1 = (b1 - positive_part_norm(p11 + gamma, T, p1)) / b1
        m2 = (b2 - positive_part_norm(p22 + p12sq / gamma, T, p2)) / b2
        return min(m1, m2)

    # first margin falls and second rises with gamma, so the minimum of the two is unimodal
    lo, hi = d1 * 1e-9, d1 * (1.0 - 1e-9)
    gamma, neg = le.golden_section(lambda g: -margin(g), lo, hi, 1e-12 * d1)
    return -neg, gamma, []


def certify_2d_example(P, p1=None, p2=None, panels=2048):
    """Tailored majorant ``B = diag(p11 + gamma, p22 + p12^2 / gamma)`` for 2 x 2 systems.

    Requires ``p11, p22 >= 0`` and ``det P >= 0`` pointwise with ``det P``
    not identically zero. ``gamma`` is chosen by golden-section search to
    maximize the smaller relative margin. When ``p1`` or ``p2`` is omitted
    every pair from the exponent grid (excluding 1) is tried and the best
    certified pair kept.
    """
    _check_sign_conditions(P)
    if p1 is None or p2 is None:
        grid = [PExponent.parse(p) for p in EXPONENT_GRID if p != 1.0]
        pairs = [(a, b) for a in grid for b in grid]
    else:
        p1, p2 = PExponent.parse(p1), PExponent.parse(p2)
        if p1.is_one or p2.is_one:
            raise DomainError("certify_2d_example needs p1, p2 > 1")
        pairs = [(p1, p2)]
    best = None
    notes = []
    for a, b in pairs:
        score, gamma, why = _pair_attempt(P, a, b, panels)
        if score is None:
            notes.extend(f"(p1={a}, p2={b}): {w}" for w in why)
            continue
        if best is None or score > best[0]:
            best = (score, gamma, a, b)
    if best is None or not best[0] > 0:
        cert = Certificate(EXAMPLE_2D, INCONCLUSIVE)
        cert.notes = notes[:8] if best is None else ["gamma search found no positive margin"]
        if best is not None:
            cert.gamma = best[1]
        return cert
    _, gamma, a, b = best

    def func(t):
        q = P(t)
        out = np.zeros_like(q)
        out[:, 0, 0] = q[:, 0, 0] + gamma
        out[:, 1, 1] = q[:, 1, 1] + q[:, 0, 1] ** 2 / gamma
        return out

    B = le.MatrixFunction(func, 2, P.period, P.sample_count)
    # B - P = [[gamma, -p12], [-p12, p12^2/gamma]] is PSD with zero determinant
    gap = _check_majorant(P, B)
    cert = _lp_certificate(P, B, [a, b], EXAMPLE_2D, panels, gap)
    cert.gamma = float(gamma)
    return cert


# --- witnesses ----------------------------------------------------------------------


def _ramp(x):
    """Smooth 0 -> 1 transition on [0, 1] (raised cosine)."""
    x = np.clip(x, 0.0, 1.0)
    return 0.5 * (1.0 - np.cos(np.pi * x))


def plateau_bump(t, T, width, start=0.0):
    """Smoothed indicator of ``[start, start + width]``: ramps of length ``0.02 T`` on each side.

    ``width`` counts the plateau only; total support is ``width + 0.04 T``.
    """
    w = RAMP_FRACTION * T
    x = np.mod(np.asarray(t, dtype=float) - start, T)
    rise = _ramp(x / w)
    fall = 1.0 - _ramp((x - w - width) / w)
    return np.where(x <= w + width + w, rise * fall, 0.0)


def _scalar_from_samples(values, T):
    return le.MatrixFunction.from_samples(np.asarray(values, dtype=float), T)


def _witness_delta(gammas, T):
    return min(1e-3, min(gammas) / 10.0, min(gammas) / (10.0 * max(1.0, T)))


def _assemble_diagonal(values_j, j, n, delta, T):
    m = values_j.size
    s = np.zeros((m, n, n))
    for i in range(n):
        s[:, i, i] = delta
    s[:, j, j] = values_j
    return le.MatrixFunction.from_samples(s, T)


def _check_gammas(gammas, j):
    gammas = [float(g) for g in gammas]
    if not gammas or any(not g > 0 for g in gammas):
        raise DomainError("all gamma_i must be positive")
    if not 0 <= j < len(gammas):
        raise DomainError("j out of range")
    return gammas


def instability_witness(gammas, j, p_j, T, steps=None, samples=WITNESS_SAMPLES):
    """Unstable diagonal potential whose ``j``-th entry has ``||p^+||_{p_j} < gamma_j``.

    ``j`` is 0-based. Searches plateau bumps ``c * phi_s`` over a fixed grid
    of widths ``s`` and heights ``c`` for the largest ``|trace| - 2`` of the
    scalar monodromy, requiring it to exceed ``1e-3``. Other diagonal
    entries are the constant ``delta = min(1e-3, min gamma / (10 max(1, T)))``,
    which keeps them well inside the stable region. The entry is stored as
    spline samples, so the potential serializes exactly.

    Returns ``(P, FloquetReport, diagnostics)``.
    """
    gammas = _check_gammas(gammas, j)
    p = PExponent.parse(p_j)
    T = float(T)
    b = beta(ANTIPERIODIC, p, T)
    if not gammas[j] > b:
        raise PreconditionError(
            f"gamma_j = {gammas[j]:.6g} must exceed beta_{p}^ant(T) = {b:.6g} for a witness to exist")
    tk = np.arange(samples) * (T / samples)
    best = None
    tried = 0
    for frac in np.linspace(0.0, 0.9, 19):
        phi = plateau_bump(tk, T, frac * T)
        shape = _scalar_from_samples(phi, T)
        nrm = positive_part_norm(shape.entry(0, 0), T, p, panels=8 * samples)
        heights = (gammas[j] / nrm) * np.linspace(0.3, 0.995, 40)
        M = le.monodromy(shape, steps, heights)
        excess = np.abs(np.trace(M, axis1=1, axis2=2)) - 2.0
        tried += heights.size
        k = int(np.argmax(excess))
        if best is None or excess[k] > best[0]:
            best = (float(excess[k]), float(heights[k]), float(frac), phi)
    if best is None or best[0] <= 1e-3:
        raise WitnessNotFound("no unstable bump with admissible norm in the search grid",
                              {"tried": tried, "best_excess": None if best is None else best[0]})
    excess, c, frac, phi = best
    values = c * phi
    P = _assemble_diagonal(values, j, len(gammas), _witness_delta(gammas, T), T)
    report = le.floquet(P, steps)
    measured = positive_part_norm(P.entry(j, j), T, p, panels=8 * samples)
    diag = {"height": c, "plateau_width": frac * T, "trace_excess": excess, "norm": measured,
            "gamma": gammas[j], "beta": b, "integral": float(np.mean(values) * T), "tried": tried}
    if not measured < gammas[j] or report.verdict != le.UNBOUNDED:
        raise WitnessNotFound("assembled witness failed re-verification", diag)
    return P, report, diag


def _two_bumps(t, T, width):
    return plateau_bump(t, T, width, 0.0) + plateau_bump(t, T, width, 0.5 * T)


def resonance_witness(gammas, j, p_j, T, steps=None, samples=WITNESS_SAMPLES):
    """Resonant diagonal ``A`` and forcing ``h`` with no periodic solution of ``u'' + A u = h``.

    The ``j``-th entry ``a = c * phi`` (two plateau bumps half a period
    apart) has ``int a > 0`` and ``||a^+||_{p_j} < gamma_j`` and is tuned
    by root finding in ``c`` until 1 is a Floquet multiplier; ``h_j`` is
    the corresponding periodic eigenfunction, which makes the forced
    problem unsolvable. ``j`` is 0-based.

    Returns ``(A, h_samples, diagnostics)``; ``h_samples`` has shape
    ``(samples, n)`` on ``t_k = k T / samples``.
    """
    gammas = _check_gammas(gammas, j)
    p = PExponent.parse(p_j)
    T = float(T)
    b = beta(PERIODIC, p, T)
    if not gammas[j] > b:
        raise PreconditionError(
            f"gamma_j = {gammas[j]:.6g} must exceed beta_{p}^per(T) = {b:.6g} for a witness to exist")
    tk = np.arange(samples) * (T / samples)
    n = len(gammas)
    tried = 0
    found = None
    for frac in np.linspace(0.45, 0.0, 10):
        phi = _two_bumps(tk, T, frac * T)
        shape = _scalar_from_samples(phi, T)
        nrm = positive_part_norm(shape.entry(0, 0), T, p, panels=8 * samples)
        heights = (gammas[j] / nrm) * np.linspace(0.02, 0.995, 60)
        tr = np.trace(le.monodromy(shape, steps, heights), axis1=1, axis2=2) - 2.0
        tried += heights.size
        # small heights give trace < 2 (stable); the first crossing of 2 is where 1 becomes a multiplier
        idx = np.nonzero((tr[:-1] < 0) & (tr[1:] >= 0))[0]
        if idx.size:
            k = int(idx[0])

            def f(c, shape=shape):
                return float(np.trace(le.monodromy(shape, steps, c))) - 2.0

            c = optimize.brentq(f, heights[k], heights[k + 1], xtol=1e-15, rtol=1e-15, maxiter=300)
            found = (c, frac, phi, f(c))
            break
    if found is None:
        raise WitnessNotFound("no resonant bump with admissible norm in the search grid", {"tried": tried})
    c, frac, phi, tr_defect = found
    values = c * phi
    A = _assemble_diagonal(values, j, n, _witness_delta(gammas, T), T)
    scalar = _scalar_from_samples(values, T)
    steps_n = le.default_steps() if steps is None else int(steps)
    y0, smin = le.periodic_null_vector(le.monodromy(scalar, steps_n))
    tt, states = le.trajectory(scalar, y0, steps_n)
    w = states[:, 0]
    w = w / np.max(np.abs(w))
    stride = steps_n // samples if steps_n % samples == 0 else None
    if stride:
        wj = w[:-1:stride]
    else:
        wj = np.interp(tk, tt, w)
    h = np.zeros((samples, n))
    h[:, j] = wj
    measured = positive_part_norm(A.entry(j, j), T, p, panels=8 * samples)
    diag = {"height": c, "plateau_width": frac * T, "trace_defect": tr_defect, "norm": measured,
            "gamma": gammas[j], "beta": b, "integral": float(np.mean(values) * T),
            "null_singular_value": smin, "tried": tried}
    try:
        le.solve_linear_periodic(A, h, steps)
        diag["resonant_linear_confirmed"] = False
    except le.ResonantLinearError:
        diag["resonant_linear_confirmed"] = True
    if not (measured < gammas[j] and abs(tr_defect) <= 1e-8 and diag["resonant_linear_confirmed"]):
        raise WitnessNotFound("assembled resonance witness failed re-verification", diag)
    return A, h, diag
