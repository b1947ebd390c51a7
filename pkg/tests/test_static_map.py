import numpy as np
import pytest

from ptdyson.errors import NotInUnbrokenRegime
from ptdyson.model import ModelParams, build_hamiltonian, eigenfrequencies
from ptdyson.static_map import solve_static, static_hermitian


def antiherm(op):
    return float(np.abs(op.coeff.imag).max())


class TestSolveStatic:
    def test_lambda_zero_identity_map(self):
        p = ModelParams(m=1.0, omega_x=1.2, omega_y=0.8, lam=0.0)
        sol = solve_static(p)
        assert sol.theta == 0.0
        h = static_hermitian(p, sol.flow_coefficient)
        assert np.abs(h.coeff - build_hamiltonian(p).coeff).max() <= 1e-14

    def test_setup_a_theta(self, setup_a):
        sol = solve_static(setup_a)
        assert abs(sol.theta - 0.5 * np.arctanh(2.0 / 3.0)) <= 1e-14
        assert abs(sol.theta - 0.40235947810852507) <= 1e-12
        assert abs(np.tanh(2 * sol.theta) - 2.0 / 3.0) <= 1e-12

    def test_setup_a_transform_hermitian(self, setup_a):
        sol = solve_static(setup_a)
        h = static_hermitian(setup_a, sol.flow_coefficient)
        assert antiherm(h) <= 1e-10

    def test_setup_a_frequencies(self, setup_a):
        sol = solve_static(setup_a)
        assert abs(sol.omega_x_sq - (5 - np.sqrt(5)) / 2) <= 1e-12
        assert abs(sol.omega_y_sq - (5 + np.sqrt(5)) / 2) <= 1e-12

    def test_transform_diagonal_matches_frequencies(self, setup_a):
        # the transformed coefficient matrix is the decoupled oscillator form
        sol = solve_static(setup_a)
        h = static_hermitian(setup_a, sol.flow_coefficient)
        c = h.coeff.real
        m = setup_a.m
        assert abs(c[0, 0] - m * sol.omega_x_sq) <= 1e-10
        assert abs(c[1, 1] - m * sol.omega_y_sq) <= 1e-10
        assert abs(c[2, 2] - 1.0 / m) <= 1e-12
        assert abs(c[3, 3] - 1.0 / m) <= 1e-12
        assert abs(c[0, 1]) <= 1e-12

    def test_setup_b_rejected(self, setup_b):
        with pytest.raises(NotInUnbrokenRegime):
            solve_static(setup_b)

    def test_exceptional_point_rejected(self, setup_c):
        with pytest.raises(NotInUnbrokenRegime):
            solve_static(setup_c)


class TestStaticHermitian:
    def test_wrong_theta_detected(self, setup_a):
        sol = solve_static(setup_a)
        h = static_hermitian(setup_a, sol.flow_coefficient / 2.0)
        assert antiherm(h) > 1e-3

    def test_residual_odd_and_monotone_near_root(self, setup_a):
        sol = solve_static(setup_a)
        star = sol.flow_coefficient

        def signed(theta):
            return float(
                np.imag(static_hermitian(setup_a, theta).coeff[0, 1])
            )

        offsets = np.array([0.02, 0.05, 0.1, 0.2])
        left = np.array([signed(star - d) for d in offsets])
        right = np.array([signed(star + d) for d in offsets])
        # odd around the root
        assert np.allclose(left, -right, rtol=0.15)
        # monotone residual growth away from the root
        assert np.all(np.diff(np.abs(right)) > 0)
        assert np.all(np.diff(np.abs(left)) > 0)

    def test_rejects_nonfinite_theta(self, setup_a):
        with pytest.raises(ValueError):
            static_hermitian(setup_a, np.inf)


class TestFrequencyConsistency:
    def test_dense_unbroken_grid_matches_model(self):
        rng = np.random.default_rng(21)
        count = 0
        while count < 60:
            p = ModelParams(
                m=rng.uniform(0.5, 2.0),
                omega_x=rng.uniform(0.5, 2.5),
                omega_y=rng.uniform(0.5, 2.5),
                lam=rng.uniform(-1.5, 1.5),
            )
            if abs(p.m * p.omega_minus_sq) <= 2.0 * abs(p.lam) * 1.05:
                continue
            count += 1
            sol = solve_static(p)
            s = eigenfrequencies(p)
            got = sorted([sol.omega_x_sq, sol.omega_y_sq])
            want = sorted([float(s.omega_x_eff.real**2), float(s.omega_y_eff.real**2)])
            assert max(abs(a - b) for a, b in zip(got, want)) <= 1e-10
            # x label tracks the bare x frequency continuously in lambda
            if p.omega_minus_sq > 0:
                assert sol.omega_x_sq <= sol.omega_y_sq + 1e-12
