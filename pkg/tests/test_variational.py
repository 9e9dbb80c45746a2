import math

import numpy as np
import pytest

from lyacert.constants import beta, extremal_function
from lyacert.errors import DegenerateError, DomainError, PreconditionError
from lyacert.grid import GridFunction
from lyacert.variational import euler_residual, functional_Ip, minimize_Ip, project_to_Xp


def sampled(func, T, n, bc="periodic"):
    return GridFunction.sample(func, T, n, bc)


class TestFunctional:
    def test_triangle_wave(self):
        v = extremal_function("per", 1, 4.0, 1024)
        assert functional_Ip("per", 1, v) == pytest.approx(4.0, rel=1e-12)

    def test_antiperiodic_cosine(self):
        v = sampled(lambda x: np.cos(np.pi * x), 1.0, 1024, "antiperiodic")
        assert functional_Ip("ant", "inf", v) == pytest.approx(math.pi**2, rel=1e-5)

    def test_projected_p2_bounded_below(self):
        n = 1024
        v = project_to_Xp(2, sampled(lambda x: np.cos(2 * np.pi * x) + 0.3, 1.0, n))
        assert functional_Ip("per", 2, v) >= beta("per", 2, 1.0) * (1 - 2 / n)

    @pytest.mark.parametrize("p", [1, 2, 3, "inf"])
    @pytest.mark.parametrize("c", [-3.0, 1e-3, 7.5])
    def test_zero_homogeneous(self, p, c):
        v = project_to_Xp(p, sampled(lambda x: np.sin(2 * np.pi * x) + 0.4 * np.cos(6 * np.pi * x), 1.0, 256))
        assert functional_Ip("per", p, v * c) == pytest.approx(functional_Ip("per", p, v), rel=1e-12)

    def test_zero_function(self):
        with pytest.raises(DegenerateError):
            functional_Ip("per", 2, GridFunction(1.0, np.zeros(65)))

    def test_tag_mismatch(self):
        v = sampled(np.cos, 2 * np.pi, 64)
        with pytest.raises(PreconditionError):
            functional_Ip("ant", 2, v)


class TestProjection:
    def test_mean_removal(self):
        v = project_to_Xp("inf", sampled(lambda x: np.sin(2 * np.pi * x) + 5, 1.0, 128))
        assert np.allclose(v.samples, np.sin(2 * np.pi * v.nodes), atol=1e-12)

    def test_p1_midrange(self):
        v = project_to_Xp(1, GridFunction(1.0, np.array([1.0, 3.0, 2.0, 1.5, 1.0])))
        assert v.samples.max() + v.samples.min() == pytest.approx(0.0, abs=1e-15)
        assert v.samples[1] == pytest.approx(1.0)

    @pytest.mark.parametrize("p", [1.5, 2, 3, 10])
    def test_integral_constraint(self, p):
        v = project_to_Xp(p, sampled(lambda x: np.exp(-30 * (x - 0.3) ** 2), 1.0, 512))
        r = 2.0 / (p - 1.0)
        x = v.values
        assert abs(np.sum(np.abs(x) ** r * x)) <= 1e-10 * np.sum(np.abs(x) ** (r + 1))

    def test_constant_is_degenerate(self):
        with pytest.raises(DegenerateError):
            project_to_Xp(2, GridFunction(1.0, np.full(33, 2.0)))


class TestMinimize:
    @pytest.mark.parametrize("bc,p,T,N,seeds,expected,rel", [
        ("per", 1, 4.0, 1024, 4, 4.0, 0.02),
        ("ant", "inf", 1.0, 1024, 4, math.pi**2, 0.01),
        ("per", 2, 1.0, 2048, 8, 31.755, 0.01),
    ])
    def test_spec_examples(self, bc, p, T, N, seeds, expected, rel):
        res = minimize_Ip(bc, p, T, N, seeds)
        assert res.value == pytest.approx(expected, rel=rel)

    @pytest.mark.parametrize("bc", ["per", "ant"])
    @pytest.mark.parametrize("p", [1, 1.5, 2, 3, "inf"])
    def test_band_around_closed_form(self, bc, p):
        N = 512
        res = minimize_Ip(bc, p, 1.0, N, 2)
        b = beta(bc, p, 1.0)
        assert b * (1 - 5 / N) <= res.value <= b * (1 + 5 / N)
        assert res.converged
        assert res.constraint_residual <= 1e-8

    def test_periodic_p1_rigidity(self):
        N = 512
        T = 1.0
        res = minimize_Ip("per", 1, T, N, 2)
        u = res.minimizer.values / np.max(np.abs(res.minimizer.values))
        w = extremal_function("per", 1, T, N).values / (T / 4)
        best = min(np.max(np.abs(np.roll(s * w, k) - u)) for k in range(N) for s in (1, -1))
        assert best <= 10.0 / N

    def test_antiperiodic_p1_rigidity(self):
        N = 512
        T = 1.0
        res = minimize_Ip("ant", 1, T, N, 2)
        u = res.minimizer.samples
        u = u / np.max(np.abs(u))
        x = res.minimizer.nodes
        best = math.inf
        for x0 in x[:-1]:
            # antiperiodic (period 2T) extension of the tent T/2 - |x - x0| on [x0 - T/2, x0 + T/2]
            d = np.mod(x - x0 + T / 2, 2 * T) - T / 2
            tent = np.where(d <= T, T / 2 - np.abs(d), -(T / 2 - np.abs(d - T)))
            tent = tent / (T / 2)
            for s in (1, -1):
                best = min(best, float(np.max(np.abs(s * tent - u))))
        assert best <= 10.0 / N

    @pytest.mark.parametrize("bc", ["per", "ant"])
    @pytest.mark.parametrize("p", [1.5, 2, 3, "inf"])
    def test_euler_residual(self, bc, p):
        N = 512
        res = minimize_Ip(bc, p, 1.0, N, 1)
        assert euler_residual(p, res.minimizer, res.value) <= 50.0 / N

    def test_lower_bound_soundness(self):
        N = 256
        rng = np.random.default_rng(3)
        for p in (1, 2, "inf"):
            floor = minimize_Ip("per", p, 1.0, N, 2).value
            for _ in range(10):
                coeffs = rng.normal(size=(5, 2))
                v = sampled(lambda x: sum(a * np.cos(2 * np.pi * (k + 1) * x) + b * np.sin(2 * np.pi * (k + 1) * x)
                                          for k, (a, b) in enumerate(coeffs)), 1.0, N)
                v = project_to_Xp(p, v)
                assert functional_Ip("per", p, v) >= floor * (1 - 1e-9)

    @pytest.mark.parametrize("kwargs", [dict(N=32), dict(seeds=0), dict(T=0.0)])
    def test_bad_arguments(self, kwargs):
        args = dict(bc="per", p=2, T=1.0, N=128, seeds=1)
        args.update(kwargs)
        with pytest.raises(DomainError):
            minimize_Ip(**args)

    def test_euler_residual_rejects_p1(self):
        with pytest.raises(DomainError):
            euler_residual(1, extremal_function("per", 1, 1.0, 64), 16.0)
