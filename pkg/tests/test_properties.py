"""Randomized properties (hypothesis) over constants, norms, majorants and monodromies."""

import math

import numpy as np
from hypothesis import given, settings
from hypothesis import strategies as st

from lyacert import certifier as cf
from lyacert import linear_engine as le
from lyacert.constants import ANTIPERIODIC, PERIODIC, PExponent, beta
from lyacert.linear_engine import MatrixFunction

exponents = st.one_of(st.floats(1.0, 50.0), st.just(math.inf))
periods = st.floats(0.05, 20.0)
bcs = st.sampled_from([PERIODIC, ANTIPERIODIC])
fast = settings(max_examples=60, deadline=None)


@fast
@given(exponents, periods)
def test_quarter_law(p, T):
    assert math.isclose(beta(PERIODIC, p, T) / beta(ANTIPERIODIC, p, T), 4.0, rel_tol=1e-12)


@fast
@given(bcs, exponents, periods)
def test_scaling_law(bc, p, T):
    e = 2.0 - float(PExponent.parse(p).reciprocal)
    assert math.isclose(beta(bc, p, T), beta(bc, p, 1.0) * T ** (-e), rel_tol=1e-12)


@fast
@given(bcs, exponents, exponents)
def test_monotone_in_p_at_unit_period(bc, p, q):
    # on a unit interval ||b||_p <= ||b||_q for p < q, so sharp constants cannot decrease in p
    lo, hi = sorted((p, q))
    assert beta(bc, lo, 1.0) <= beta(bc, hi, 1.0) * (1 + 1e-12)


@fast
@given(st.floats(0.0, 5.0), st.floats(0.1, 3.0), exponents)
def test_norm_homogeneous(scale, T, p):
    b = lambda t: np.sin(2 * np.pi * t / T) + 0.3
    base = cf.positive_part_norm(b, T, p)
    scaled = cf.positive_part_norm(lambda t: scale * b(t), T, p)
    assert math.isclose(scaled, scale * base, rel_tol=1e-10, abs_tol=1e-14)


@fast
@given(st.floats(-3.0, 3.0), st.floats(0.1, 3.0), exponents)
def test_norm_of_constant(c, T, p):
    val = cf.positive_part_norm(lambda t: c + 0 * t, T, p)
    pe = PExponent.parse(p)
    expected = max(c, 0.0) * (1.0 if pe.is_infinity else T ** (1.0 / pe.value))
    assert math.isclose(val, expected, rel_tol=1e-10, abs_tol=1e-14)


@fast
@given(st.integers(1, 4), st.integers(0, 10_000))
def test_gershgorin_dominates(n, seed):
    rng = np.random.default_rng(seed)
    A = rng.normal(size=(n, n))
    Q = MatrixFunction.constant(A + A.T, 1.0)
    B = cf.gershgorin_majorant(Q)
    assert np.linalg.eigvalsh(B(0.0) - Q(0.0)).min() >= -1e-12


@settings(max_examples=25, deadline=None)
@given(st.integers(1, 3), st.integers(0, 10_000), st.sampled_from([0.5, 1.0, 2 * math.pi]))
def test_monodromy_symplectic(n, seed, T):
    rng = np.random.default_rng(seed)
    entries = {(i, j): [(rng.normal() / T**2, 0.0, 0), (rng.normal() / T**2, rng.normal() / T**2, 1)]
               for i in range(n) for j in range(i, n)}
    Q = MatrixFunction.from_fourier(entries, n, T)
    M = le.monodromy(Q, 1024)
    J = np.block([[np.zeros((n, n)), np.eye(n)], [-np.eye(n), np.zeros((n, n))]])
    assert np.max(np.abs(M.T @ J @ M - J)) <= 1e-8 * max(1.0, np.max(np.abs(M)) ** 2)


@settings(max_examples=30, deadline=None)
@given(st.floats(0.01, 0.99), st.sampled_from([0.5, 1.0, 2 * math.pi]))
def test_scalar_constant_below_edge_is_certified_and_stable(frac, T):
    c = frac * math.pi**2 / T**2
    Q = MatrixFunction.constant([[c]], T)
    assert cf.certify_thm41(Q, exponents=["inf"]).certified
    assert le.floquet(Q, 512).verdict == le.BOUNDED_STABLE


@settings(max_examples=30, deadline=None)
@given(st.floats(0.05, 3.0), st.floats(-2.0, 2.0))
def test_choose_exponents_is_grid_minimizer(amp, offset):
    b = lambda t: offset + amp * np.cos(2 * np.pi * t)
    chosen = cf.choose_exponents(b, 1.0)
    ratios = [cf.positive_part_norm(b, 1.0, p) / beta(ANTIPERIODIC, p, 1.0) for p in cf.EXPONENT_GRID]
    got = cf.positive_part_norm(b, 1.0, chosen) / beta(ANTIPERIODIC, chosen, 1.0)
    assert got <= min(ratios) * (1 + 1e-12) + 1e-300
