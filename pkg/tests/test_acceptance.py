"""Acceptance criteria 1-10.

Each criterion is one test with a wall-clock budget. Outcomes are
collected in ``RESULTS`` and printed as one PASS/FAIL line per criterion
at the end of the pytest run (see ``conftest.py``). The file also runs
standalone: ``python3 tests/test_acceptance.py``.
"""

import functools
import itertools
import json
import math
import sys
import time
from importlib.resources import files
from pathlib import Path

import numpy as np
import pytest

sys.path.insert(0, str(Path(__file__).parent))

from corpus import mathieu_grid, monodromy_corpus, nonlinear_corpus, random_initial_guess, random_lambda_2x2  # noqa: E402
from lyacert import certifier as cf  # noqa: E402
from lyacert import linear_engine as le  # noqa: E402
from lyacert import resonant as rs  # noqa: E402
from lyacert.cli import _run_certify, run_sweep  # noqa: E402
from lyacert.constants import ANTIPERIODIC, PERIODIC, beta, extremal_function  # noqa: E402
from lyacert.linear_engine import MatrixFunction  # noqa: E402
from lyacert.variational import functional_Ip, minimize_Ip  # noqa: E402

TWO_PI = 2.0 * math.pi
RESULTS = {}
TITLES = {}


def criterion(number, title, budget):
    """Record outcome and runtime; a run over ``budget`` seconds fails."""
    TITLES[number] = title

    def wrap(fn):
        @functools.wraps(fn)
        def run(*args, **kwargs):
            start = time.perf_counter()
            try:
                detail = fn(*args, **kwargs) or ""
            except BaseException as exc:
                RESULTS[number] = (False, time.perf_counter() - start, budget, f"{type(exc).__name__}: {exc}")
                raise
            elapsed = time.perf_counter() - start
            ok = elapsed < budget
            RESULTS[number] = (ok, elapsed, budget, detail if ok else f"over budget; {detail}")
            assert ok, f"criterion {number} took {elapsed:.1f}s, budget {budget}s"

        return run

    return wrap


def summary_lines():
    lines = []
    for n in sorted(TITLES):
        if n not in RESULTS:
            lines.append(f"criterion {n:2d} NOT RUN  {TITLES[n]}")
            continue
        ok, elapsed, budget, detail = RESULTS[n]
        status = "PASS" if ok else "FAIL"
        lines.append(f"criterion {n:2d} {status}  {TITLES[n]}  [{elapsed:.2f}s / {budget}s]  {detail}")
    return lines


def rel(a, b):
    return abs(a - b) / abs(b)


@criterion(1, "closed-form constants", 1.0)
def test_criterion_01_closed_forms():
    worst = 0.0
    for T in (0.5, 1.0, TWO_PI):
        checks = [(beta(PERIODIC, 1, T) * T, 16.0), (beta(PERIODIC, "inf", T) * T**2, 4 * math.pi**2),
                  (beta(ANTIPERIODIC, 1, T) * T, 4.0), (beta(ANTIPERIODIC, "inf", T) * T**2, math.pi**2)]
        for got, want in checks:
            worst = max(worst, rel(got, want))
    assert worst <= 1e-12, worst
    return f"max rel err {worst:.1e}"


@criterion(2, "quarter law and scaling law", 1.0)
def test_criterion_02_quarter_and_scaling():
    worst = 0.0
    for p in (1, 1.5, 2, 3, 10, math.inf):
        e = 2.0 - (0.0 if math.isinf(p) else 1.0 / p)
        for T in (0.5, 1.0, 3.0, TWO_PI):
            worst = max(worst, rel(beta(PERIODIC, p, T) / beta(ANTIPERIODIC, p, T), 4.0))
            for bc in (PERIODIC, ANTIPERIODIC):
                worst = max(worst, rel(beta(bc, p, T), beta(bc, p, 1.0) * T ** (-e)))
    assert worst <= 1e-12, worst
    return f"max rel err {worst:.1e}"


@criterion(3, "variational reproduction at N=2048", 120.0)
def test_criterion_03_variational():
    worst = 0.0
    for bc in (PERIODIC, ANTIPERIODIC):
        for p in (1, 2, "inf"):
            res = minimize_Ip(bc, p, 1.0, 2048)
            worst = max(worst, rel(res.value, beta(bc, p, 1.0)))
    assert worst < 0.01, worst
    return f"max rel err {worst:.1e}"


@criterion(4, "extremal exactness", 1.0)
def test_criterion_04_extremals():
    worst = 0.0
    for T in (0.5, 1.0, TWO_PI):
        for N in (64, 1024):
            worst = max(worst, rel(functional_Ip(PERIODIC, 1, extremal_function(PERIODIC, 1, T, N)), 16.0 / T))
            worst = max(worst, rel(functional_Ip(ANTIPERIODIC, 1, extremal_function(ANTIPERIODIC, 1, T, N)), 4.0 / T))
    assert worst <= 1e-12, worst
    return f"max rel err {worst:.1e}"


@criterion(5, "lambda_1 for Q = c I", 30.0)
def test_criterion_05_lambda1():
    worst_shoot = worst_ray = 0.0
    for n in (1, 2, 3):
        for c, T in ((0.5, 1.0), (2.0, TWO_PI), (3.0, 0.5)):
            Q = MatrixFunction.constant(c * np.eye(n), T)
            rep = le.lambda1_shooting(Q, with_rayleigh=True, rayleigh_cells=512)
            exact = math.pi**2 / (c * T * T)
            worst_shoot = max(worst_shoot, rel(rep.lambda1, exact))
            worst_ray = max(worst_ray, rel(rep.rayleigh_estimate, 1.0 / exact))
    assert worst_shoot <= 1e-8 and worst_ray <= 1e-3, (worst_shoot, worst_ray)
    return f"shooting {worst_shoot:.1e}, Rayleigh {worst_ray:.1e}"


@criterion(6, "monodromy invariants on 50 potentials", 120.0)
def test_criterion_06_monodromy():
    det_err = sym = 0.0
    corpus = monodromy_corpus(50)
    for _, Q in corpus:
        rep = le.floquet(Q)
        det_err = max(det_err, rep.det_error)
        sym = max(sym, rep.symmetry_defect)
    assert len(corpus) == 50
    assert det_err <= 1e-8 and sym <= 1e-6, (det_err, sym)
    return f"|det-1| {det_err:.1e}, symmetry {sym:.1e}"


@criterion(7, "certifier soundness sweep", 300.0)
def test_criterion_07_soundness():
    template = json.loads((files("lyacert") / "specs" / "mathieu_template.json").read_text())
    grid = mathieu_grid(20)
    deltas = sorted({d for d, _ in grid})
    epss = sorted({e for _, e in grid})
    header, rows = run_sweep(template, [("delta", deltas), ("eps", epss)], method="thm41", lambda1="certified")
    col = {name: k for k, name in enumerate(header)}
    bad = []
    certified = lp_checked = 0
    min_lambda = math.inf
    for row in rows:
        if row[col["certificate"]] != cf.CERTIFIED:
            continue
        certified += 1
        if row[col["floquet"]] != le.BOUNDED_STABLE:
            bad.append(("mathieu", row[:2], row[col["floquet"]]))
        if row[col["method"]] == cf.LP_MAJORANT:
            lp_checked += 1
            lam = row[col["lambda1"]]
            min_lambda = min(min_lambda, lam if lam is not None else -math.inf)
            if lam is None or not lam > 1 + 1e-8:
                bad.append(("mathieu lambda1", row[:2], lam))
    for name, P in random_lambda_2x2(30):
        assert cf.check_lambda_membership(P).member, name
        c, _ = _run_certify(P, None, None, "auto", 2)
        if not c.certified:
            continue
        certified += 1
        verdict = le.floquet(P).verdict
        if verdict != le.BOUNDED_STABLE:
            bad.append((name, c.method, verdict))
        if c.method in (cf.LP_MAJORANT, cf.EXAMPLE_2D):
            lp_checked += 1
            lam = le.lambda1_shooting(P).lambda1
            min_lambda = min(min_lambda, lam)
            if not lam > 1 + 1e-8:
                bad.append((name, "lambda1", lam))
    assert len(rows) == 400
    assert not bad, bad[:5]
    assert certified > 0
    return f"{certified} certified, 0 disagreements, min lambda1 {min_lambda:.4f} over {lp_checked} majorant certificates"


@criterion(8, "resonant solver analytic and linear cases", 10.0)
def test_criterion_08_resonant_analytic():
    T = TWO_PI

    def linear(M):
        M = np.atleast_2d(M)
        n = M.shape[0]
        B = np.diag(np.diag(M) + np.sum(np.abs(M), 1) - np.abs(np.diag(M)))
        return rs.NonlinearProblem(n, T, lambda t, u: u @ M, lambda t, u: np.broadcast_to(M, (t.size, n, n)).copy(),
                                   MatrixFunction.constant(M, T), MatrixFunction.constant(B, T), ["inf"] * n)

    sol = rs.solve_resonant(linear(np.array([[0.5]])), lambda t: np.cos(t))
    err1 = float(np.max(np.abs(sol.samples[:, 0] + 2 * np.cos(sol.t))))
    M = np.array([[0.45, 0.15], [0.15, 0.6]])
    h = lambda t: np.column_stack([np.cos(t) + 0.2 * np.sin(3 * t), 0.4 + np.sin(2 * t)])
    sol2 = rs.solve_resonant(linear(M), h)
    direct = le.solve_linear_periodic(MatrixFunction.constant(M, T), h)
    err2 = float(np.max(np.abs(sol2.samples - direct.samples)))
    assert err1 < 1e-6 and err2 < 1e-8, (err1, err2)
    return f"-2cos t error {err1:.1e}, SPD vs direct {err2:.1e}"


@criterion(9, "uniqueness probe on 5 nonlinear problems", 180.0)
def test_criterion_09_uniqueness():
    rng = np.random.default_rng(20240915)
    worst = 0.0
    steps = le.default_steps()
    probs = nonlinear_corpus()
    assert len(probs) == 5
    for prob, h in probs:
        assert rs.check_t1_hypotheses(prob).passed, prob.name
        sols = [rs.solve_resonant(prob, h, init=random_initial_guess(rng, prob.dim, steps)).samples
                for _ in range(5)]
        for a, b in itertools.combinations(sols, 2):
            worst = max(worst, float(np.max(np.abs(a - b))))
    assert worst < 1e-6, worst
    return f"max pairwise sup difference {worst:.1e}"


@criterion(10, "witness closed loops", 120.0)
def test_criterion_10_witnesses():
    count = 0
    min_margin = math.inf
    for T in (1.0, TWO_PI):
        for p in (1, 2, "inf"):
            gamma = 1.5 * beta(ANTIPERIODIC, p, T)
            P, rep, _ = cf.instability_witness([gamma], 0, p, T)
            norm = cf.positive_part_norm(P.entry(0, 0), T, p, 8192)
            assert rep.verdict == le.UNBOUNDED and rep.unit_circle_margin > 1e-3 and norm < gamma
            min_margin = min(min_margin, rep.unit_circle_margin)

            gamma = 1.1 * beta(PERIODIC, p, T)
            A, hs, diag = cf.resonance_witness([gamma], 0, p, T)
            assert diag["norm"] < gamma
            with pytest.raises(le.ResonantLinearError):
                le.solve_linear_periodic(A, hs)
            count += 2
    return f"{count} witnesses verified, min multiplier margin {min_margin:.2e}"


if __name__ == "__main__":
    failed = 0
    for name, fn in sorted((k, v) for k, v in globals().items() if k.startswith("test_criterion_")):
        try:
            fn()
        except BaseException:
            failed += 1
    print("\n".join(summary_lines()))
    sys.exit(1 if failed else 0)
