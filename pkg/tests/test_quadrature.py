"""Grid construction and deterministic tensor-product integration."""

import math

import numpy as np
import pytest

from deltagas.quadrature import (
    DampingBudget,
    GridInfeasibleError,
    NonFiniteIntegrandError,
    build_grid,
    integrate_nd,
    uniform_grid,
)

GAUSS_1D = 1.0 / (2.0 * math.sqrt(math.pi))  # int e^{-k^2} dk / (2 pi)


class TestGridConstruction:
    def test_nodes_symmetric_zero_included(self):
        g = uniform_grid(3.0, 7)
        assert np.allclose(g.nodes, -g.nodes[::-1])
        assert 0.0 in g.nodes

    def test_weights_sum(self):
        g = uniform_grid(5.0, 101)
        assert np.sum(g.weights) == pytest.approx(2 * 5.0 / (2 * math.pi), rel=1e-14)

    def test_parameter_validation(self):
        with pytest.raises(ValueError):
            uniform_grid(-1.0, 11)
        with pytest.raises(ValueError):
            uniform_grid(1.0, 4)
        with pytest.raises(ValueError):
            uniform_grid(1.0, 1)

    def test_budget_kmax_examples(self):
        g = build_grid(DampingBudget(eta_eff=0.01, eps_quad=1e-12, n_k_ceiling=10**6))
        assert g.k_max == pytest.approx(52.57, abs=0.01)
        g = build_grid(DampingBudget(eta_eff=1.0, eps_quad=1e-12))
        assert g.k_max == pytest.approx(5.257, abs=0.001)
        g = build_grid(DampingBudget(eta_eff=4.6052, eps_quad=1e-2))
        assert g.k_max == pytest.approx(1.0, abs=1e-4)

    def test_budget_validation(self):
        with pytest.raises(ValueError):
            DampingBudget(eta_eff=0.0)
        with pytest.raises(ValueError):
            DampingBudget(eta_eff=1.0, eps_quad=0.5)
        with pytest.raises(ValueError):
            DampingBudget(eta_eff=1.0, L_max=-1.0)

    def test_ceiling_infeasible(self):
        with pytest.raises(GridInfeasibleError):
            build_grid(DampingBudget(eta_eff=1e-4, L_max=50.0, t_scale=10.0, eps_quad=1e-12))


class TestIntegration:
    def test_constant_1d(self):
        g = uniform_grid(math.pi, 3)
        val = integrate_nd(lambda k: np.ones(k.shape[0], dtype=complex), g, 1)
        assert val == pytest.approx(1.0, rel=1e-14)

    def test_gaussian_1d(self):
        g = uniform_grid(6.0, 241)
        val = integrate_nd(lambda k: np.exp(-k[:, 0] ** 2).astype(complex), g, 1)
        assert val.real == pytest.approx(GAUSS_1D, rel=1e-12)
        assert abs(val.imag) <= 1e-15

    def test_gaussian_2d_factorizes(self):
        g = uniform_grid(6.0, 121)
        val = integrate_nd(
            lambda k: np.exp(-np.sum(k**2, axis=1)).astype(complex), g, 2
        )
        one_d = integrate_nd(lambda k: np.exp(-k[:, 0] ** 2).astype(complex), g, 1)
        assert val == pytest.approx(one_d**2, rel=1e-13)
        assert val.real == pytest.approx(GAUSS_1D**2, rel=1e-10)

    def test_separable_3d(self):
        g = uniform_grid(5.0, 41)
        f3 = integrate_nd(
            lambda k: np.exp(-np.sum(k**2, axis=1) / 2).astype(complex), g, 3
        )
        f1 = integrate_nd(lambda k: np.exp(-k[:, 0] ** 2 / 2).astype(complex), g, 1)
        assert f3 == pytest.approx(f1**3, rel=1e-13)

    def test_refinement_convergence(self):
        eps = 1e-10
        budget = DampingBudget(eta_eff=0.5, L_max=1.0, eps_quad=eps)
        g1 = build_grid(budget)
        g2 = uniform_grid(g1.k_max, 2 * g1.n_k - 1)

        def f(k):
            return np.exp(-0.5 * k[:, 0] ** 2 + 1j * k[:, 0]).astype(complex)

        v1 = integrate_nd(f, g1, 1)
        v2 = integrate_nd(f, g2, 1)
        assert abs(v1 - v2) < eps

    def test_even_integrand_real(self):
        g = uniform_grid(6.0, 201)
        val = integrate_nd(
            lambda k: (np.exp(-np.sum(k**2, axis=1)) * np.cos(k[:, 0])).astype(complex),
            g,
            2,
        )
        assert abs(val.imag) <= 1e-13 * abs(val)

    def test_nonfinite_aborts_with_node(self):
        g = uniform_grid(2.0, 5)

        def f(k):
            out = np.ones(k.shape[0], dtype=complex)
            out[k[:, 0] > 0.9] = np.nan
            return out

        with pytest.raises(NonFiniteIntegrandError) as err:
            integrate_nd(f, g, 1)
        assert err.value.node is not None

    def test_deterministic_bits(self):
        g = uniform_grid(4.0, 81)

        def f(k):
            return np.exp(-np.sum(k**2, axis=1) + 1j * k[:, 0]).astype(complex)

        a = integrate_nd(f, g, 2)
        b = integrate_nd(f, g, 2)
        assert a == b
