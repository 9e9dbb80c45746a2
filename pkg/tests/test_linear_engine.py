import math

import numpy as np
import pytest

from corpus import mathieu, monodromy_corpus
from lyacert import linear_engine as le
from lyacert.errors import DomainError, NotFoundError, ResonantLinearError
from lyacert.linear_engine import MatrixFunction

TWO_PI = 2 * math.pi


def rotation(omega, T):
    c, s = math.cos(omega * T), math.sin(omega * T)
    return np.array([[c, s / omega], [-omega * s, c]])


class TestMatrixFunction:
    def test_periodic_and_symmetric(self):
        Q = MatrixFunction(lambda t: np.stack([np.stack([np.cos(t), t * 0 + 1], -1),
                                               np.stack([t * 0, np.sin(t)], -1)], -2), 2, TWO_PI)
        t = np.array([0.3, 1.7])
        assert np.allclose(Q(t), Q(t + TWO_PI))
        assert np.allclose(Q(t), np.swapaxes(Q(t), 1, 2))
        assert Q(0.3).shape == (2, 2)

    def test_fourier_and_samples_agree(self):
        Q = MatrixFunction.from_fourier({(0, 0): [(1.0, 0.0, 0), (0.5, 0.2, 1)], (0, 1): [(0.0, 0.3, 2)]}, 2, 1.0)
        t, s = Q.samples(256)
        S = MatrixFunction.from_samples(s, 1.0)
        tt = np.linspace(0, 1, 97)
        assert np.max(np.abs(S(tt) - Q(tt))) < 1e-6

    def test_mean(self):
        Q = MatrixFunction.from_fourier({(0, 0): [(0.7, 0.0, 0), (3.0, 1.0, 1)]}, 1, 2.0)
        assert Q.mean()[0, 0] == pytest.approx(0.7, abs=1e-12)

    def test_bad_construction(self):
        with pytest.raises(DomainError):
            MatrixFunction(lambda t: t, 1, -1.0)
        with pytest.raises(DomainError):
            MatrixFunction.from_samples(np.zeros(3), 1.0)


class TestPropagate:
    def test_free_particle(self):
        Q = MatrixFunction.constant([[0.0]], 3.0)
        assert np.allclose(le.propagate(Q, 0.0, 3.0, [0.0, 1.0]), [3.0, 1.0], atol=1e-13)

    def test_harmonic_rotation(self):
        w, T = 1.7, 2.0
        Q = MatrixFunction.constant(np.diag([w**2, w**2]), T)
        out = le.propagate(Q, 0.0, T, np.array([1.0, 0.0, 0.0, w]))
        assert out[0] == pytest.approx(math.cos(w * T), abs=1e-11)
        assert out[1] == pytest.approx(math.sin(w * T), abs=1e-11)

    def test_backwards_rejected(self):
        with pytest.raises(DomainError):
            le.propagate(MatrixFunction.constant([[1.0]], 1.0), 1.0, 0.0, [1.0, 0.0])

    def test_fourth_order_convergence(self):
        T = 1.0
        Q = MatrixFunction.from_fourier({(0, 0): [(20.0, 0, 0), (20.0, 0, 1)]}, 1, T)
        ref = le.monodromy(Q, 8192)
        errs = [np.max(np.abs(le.monodromy(Q, n) - ref)) for n in (64, 128, 256)]
        orders = [math.log2(errs[i] / errs[i + 1]) for i in range(2)]
        assert all(3.5 <= o <= 4.5 for o in orders), orders


class TestMonodromy:
    def test_zero_potential(self):
        M = le.monodromy(MatrixFunction.constant([[0.0]], 2.5))
        assert np.allclose(M, [[1.0, 2.5], [0.0, 1.0]], atol=1e-13)

    @pytest.mark.parametrize("w,T", [(1.0, 1.0), (0.3, TWO_PI), (2.5, 0.7)])
    def test_harmonic(self, w, T):
        M = le.monodromy(MatrixFunction.constant([[w * w]], T))
        assert np.allclose(M, rotation(w, T), atol=1e-10)

    def test_block_diagonal_direct_sum(self):
        q1 = MatrixFunction.from_fourier({(0, 0): [(0.3, 0, 0), (0.2, 0.1, 1)]}, 1, 1.0)
        q2 = MatrixFunction.from_fourier({(0, 0): [(2.0, 0, 0), (0.0, 1.0, 2)]}, 1, 1.0)
        M = le.monodromy(MatrixFunction.block_diag([q1, q2]))
        M1, M2 = le.monodromy(q1), le.monodromy(q2)
        # state order is (u1, u2, u1', u2')
        assert np.allclose(M[np.ix_([0, 2], [0, 2])], M1, atol=1e-8)
        assert np.allclose(M[np.ix_([1, 3], [1, 3])], M2, atol=1e-8)
        assert np.allclose(M[np.ix_([0, 2], [1, 3])], 0.0, atol=1e-12)

    def test_batched_matches_single(self):
        Q = mathieu(0.2, 0.1)
        mus = np.array([0.5, 1.0, 3.0])
        batch = le.monodromy(Q, mu=mus)
        for k, mu in enumerate(mus):
            assert np.allclose(batch[k], le.monodromy(Q.scaled(mu)), atol=1e-12)

    def test_corpus_invariants(self):
        for name, Q in monodromy_corpus():
            rep = le.floquet(Q)
            assert rep.det_error <= 1e-8, name
            assert rep.symmetry_defect <= 1e-6, name

    def test_steps_env_override(self, monkeypatch):
        monkeypatch.setenv("LYACERT_STEPS", "512")
        assert le.default_steps() == 512
        monkeypatch.setenv("LYACERT_STEPS", "2")
        with pytest.raises(DomainError):
            le.default_steps()


class TestFloquet:
    def test_harmonic_stable(self):
        rep = le.floquet(MatrixFunction.constant([[0.3]], TWO_PI))
        w = math.sqrt(0.3)
        assert rep.verdict == le.BOUNDED_STABLE
        expected = np.exp(1j * w * TWO_PI * np.array([1, -1]))
        assert np.allclose(np.sort_complex(rep.multipliers), np.sort_complex(expected), atol=1e-10)

    def test_zero_is_marginal(self):
        assert le.floquet(MatrixFunction.constant([[0.0]], 1.0)).verdict == le.MARGINAL

    def test_mathieu_tongue(self):
        rep = le.floquet(mathieu(0.25, 0.2))
        assert rep.verdict == le.UNBOUNDED
        assert abs(rep.trace) > 2
        # halved step agrees
        assert abs(np.trace(le.monodromy(mathieu(0.25, 0.2), 2048)) - rep.trace) < 1e-9

    def test_mathieu_stable(self):
        assert le.floquet(mathieu(0.1, 0.05)).verdict == le.BOUNDED_STABLE


class TestLambda1:
    @pytest.mark.parametrize("n", [1, 2, 3])
    @pytest.mark.parametrize("c,T", [(0.5, 1.0), (2.0, TWO_PI)])
    def test_constant_identity(self, n, c, T):
        rep = le.lambda1_shooting(MatrixFunction.constant(c * np.eye(n), T))
        assert rep.lambda1 == pytest.approx(math.pi**2 / (c * T * T), rel=1e-8)
        assert rep.bracketing_interval[0] <= rep.lambda1 <= rep.bracketing_interval[1]

    def test_diagonal_takes_largest_entry(self):
        rep = le.lambda1_shooting(MatrixFunction.constant(np.diag([0.4, 1.3]), 1.0))
        assert rep.lambda1 == pytest.approx(math.pi**2 / 1.3, rel=1e-8)

    def test_scaling(self):
        Q = mathieu(0.1, 0.08)
        a = le.lambda1_shooting(Q).lambda1
        b = le.lambda1_shooting(Q.scaled(2.0)).lambda1
        assert b == pytest.approx(a / 2, rel=1e-8)

    @pytest.mark.parametrize("Q", [mathieu(0.1, 0.08), mathieu(0.25, 0.2),
                                   MatrixFunction.from_fourier({(0, 0): [(1.0, 0, 0), (0.5, 0, 1)],
                                                                (1, 1): [(0.4, 0, 0), (0, 0.3, 1)],
                                                                (0, 1): [(0.1, 0.0, 0)]}, 2, 1.0)])
    def test_rayleigh_consistency(self, Q):
        rep = le.lambda1_shooting(Q, with_rayleigh=True)
        assert rep.rayleigh_estimate == pytest.approx(1.0 / rep.lambda1, rel=1e-3)

    def test_rayleigh_constant_case(self):
        c, T = 0.7, 1.0
        est = le.rayleigh_lambda1(MatrixFunction.constant([[c]], T), 512)
        assert est == pytest.approx(c * T * T / math.pi**2, rel=1e-4)

    def test_rayleigh_block_diagonal(self):
        q1 = mathieu(0.1, 0.05)
        q2 = mathieu(0.3, 0.1)
        both = le.rayleigh_lambda1(MatrixFunction.block_diag([q1, q2]), 256)
        assert both == pytest.approx(max(le.rayleigh_lambda1(q1, 256), le.rayleigh_lambda1(q2, 256)), rel=1e-10)

    def test_not_found_carries_diagnostics(self):
        with pytest.raises(NotFoundError) as exc:
            le.lambda1_shooting(MatrixFunction.constant([[1.0]], 1.0), mu_max=1.0)
        assert exc.value.diagnostics["scan"]


class TestSolveLinearPeriodic:
    def test_half_oscillator(self):
        sol = le.solve_linear_periodic(MatrixFunction.constant([[0.5]], TWO_PI), lambda t: np.cos(t))
        assert np.max(np.abs(sol.samples[:, 0] + 2 * np.cos(sol.t))) < 1e-6
        assert sol.residual_sup <= 1e-6 * 2

    def test_constant_forcing(self):
        a = np.diag([0.3, 2.5])
        sol = le.solve_linear_periodic(MatrixFunction.constant(a, TWO_PI), lambda t: np.tile([1.0, 2.0], (t.size, 1)))
        assert np.allclose(sol.samples, [1 / 0.3, 2 / 2.5], atol=1e-10)

    @pytest.mark.parametrize("T", [TWO_PI, 1.0, 3.0])
    def test_resonant(self, T):
        C = MatrixFunction.constant([[(2 * math.pi / T) ** 2]], T)
        with pytest.raises(ResonantLinearError):
            le.solve_linear_periodic(C, lambda t: np.cos(t))

    def test_residual_bound_variable_coefficients(self):
        C = MatrixFunction.from_fourier({(0, 0): [(0.3, 0, 0), (0.2, 0, 1)], (1, 1): [(0.6, 0, 0), (0, 0.1, 2)],
                                         (0, 1): [(0.05, 0, 0)]}, 2, TWO_PI)
        g = lambda t: np.column_stack([np.sin(t), 1 + np.cos(3 * t)])
        sol = le.solve_linear_periodic(C, g)
        assert sol.residual_sup <= 1e-6 * (1 + 2.0)
        assert sol.bc_mismatch <= 1e-9

    def test_sampled_forcing(self):
        t = np.arange(256) * TWO_PI / 256
        sol = le.solve_linear_periodic(MatrixFunction.constant([[0.5]], TWO_PI), np.cos(t))
        assert np.max(np.abs(sol.samples[:, 0] + 2 * np.cos(sol.t))) < 1e-6

    def test_null_vector(self):
        M = le.monodromy(MatrixFunction.constant([[1.0]], TWO_PI))
        v, s = le.periodic_null_vector(M)
        assert s < 1e-10 and np.linalg.norm(v) == pytest.approx(1.0)
