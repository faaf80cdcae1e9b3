"""Lattice oracle: unitarity, symmetry, free control, cusp emergence."""

import numpy as np
import pytest

from deltagas.packets import GaussianPacketSpec, InitialState, packet_value, free_packet_evolved
from deltagas.lattice import (
    GridState,
    LatticeConfig,
    compare_fields,
    diagonal_cusp_ratio,
    evolve_lattice,
    free_reference_field,
    init_from_packets,
    mollified_delta,
    step,
)


def small_cfg(c=1.0, n_x=193, L=6.0, w_mult=4):
    h = 2 * L / (n_x - 1)
    return LatticeConfig(L=L, n_x=n_x, dt=h * h, w=w_mult * h, c=c)


def gentle_pair(a=0.45, off=1.5, p=0.4):
    return InitialState(
        (GaussianPacketSpec(a, -off, p), GaussianPacketSpec(a, off, -p))
    )


class TestConfig:
    def test_mollifier_resolution_enforced(self):
        h = 12.0 / 192
        with pytest.raises(ValueError):
            LatticeConfig(L=6.0, n_x=193, dt=h * h, w=1.5 * h, c=1.0)

    def test_dt_accuracy_bound_enforced(self):
        h = 12.0 / 192
        with pytest.raises(ValueError):
            LatticeConfig(L=6.0, n_x=193, dt=2 * h * h, w=4 * h, c=1.0)

    def test_mollifier_unit_mass(self):
        w = 0.2
        u = np.linspace(-3, 3, 6001)
        mass = np.trapezoid(mollified_delta(u, w), u)
        assert mass == pytest.approx(1.0, abs=1e-12)


class TestInit:
    def test_symmetric_normalized(self):
        cfg = small_cfg()
        g = init_from_packets(cfg, gentle_pair())
        assert g.symmetry_residual() == 0.0
        assert g.grid_norm(cfg.h) == pytest.approx(1.0, abs=1e-12)

    def test_matches_packet_products_pointwise(self):
        cfg = small_cfg()
        st = gentle_pair()
        g = init_from_packets(cfg, st)
        ax = cfg.axis
        raw = np.outer(packet_value(ax, st.packets[0]), packet_value(ax, st.packets[1]))
        raw = raw + raw.T
        raw[0, :] = raw[-1, :] = raw[:, 0] = raw[:, -1] = 0.0
        raw /= np.sqrt(np.sum(np.abs(raw) ** 2) * cfg.h**2)
        assert np.max(np.abs(g.psi - raw)) <= 1e-12

    def test_boundary_leakage_rejected(self):
        cfg = small_cfg(L=3.0, n_x=97)
        wide = InitialState(
            (GaussianPacketSpec(1.0, -1.0), GaussianPacketSpec(1.0, 1.0))
        )
        with pytest.raises(ValueError):
            init_from_packets(cfg, wide)


class TestStepping:
    def test_norm_drift_per_step(self):
        cfg = small_cfg()
        g = init_from_packets(cfg, gentle_pair())
        n0 = g.grid_norm(cfg.h)
        g = step(cfg, g)
        assert abs(g.grid_norm(cfg.h) - n0) <= 1e-12

    def test_long_run_unitarity_and_symmetry(self):
        cfg = small_cfg()
        g = init_from_packets(cfg, gentle_pair())
        g, tele = evolve_lattice(cfg, g, 1000 * cfg.dt)
        assert abs(tele["final_norm"] - 1.0) <= 1e-9
        assert tele["max_step_drift"] <= 1e-12
        assert tele["max_asym"] <= 1e-5  # pre-projection splitting residue
        assert g.symmetry_residual() <= 1e-10

    def test_time_must_be_step_multiple(self):
        cfg = small_cfg()
        g = init_from_packets(cfg, gentle_pair())
        with pytest.raises(ValueError):
            evolve_lattice(cfg, g, 10.5 * cfg.dt)

    def test_free_single_packet_against_analytic(self):
        # one Gaussian blob in configuration space, c = 0, 100 steps
        h = 16.0 / 512
        cfg = LatticeConfig(L=8.0, n_x=513, dt=h * h, w=4 * h, c=0.0)
        pk = GaussianPacketSpec(0.7, 0.0, 0.0)
        phi = packet_value(cfg.axis, pk)
        psi = np.outer(phi, phi).astype(complex)
        psi[0, :] = psi[-1, :] = psi[:, 0] = psi[:, -1] = 0.0
        psi /= np.sqrt(np.sum(np.abs(psi) ** 2) * cfg.h**2)
        g, _ = evolve_lattice(cfg, GridState(psi=psi, t=0.0), 100 * cfg.dt)
        f = free_packet_evolved(cfg.axis, g.t, pk)
        assert compare_fields(cfg, g.psi, np.outer(f, f)) <= 1e-4

    def test_free_pair_control(self):
        cfg = small_cfg(c=0.0, n_x=385)
        st = gentle_pair()
        g = init_from_packets(cfg, st)
        t_final = 200 * cfg.dt
        g, _ = evolve_lattice(cfg, g, t_final)
        ref = free_reference_field(cfg, st, t_final)
        assert compare_fields(cfg, g.psi, ref) <= 1e-3


class TestCuspEmergence:
    def test_ratio_grows_as_mollifier_narrows(self):
        st = gentle_pair(a=0.5, off=1.5, p=0.0)
        ratios = []
        for mult in (8, 4, 2):
            cfg = small_cfg(c=1.0, n_x=257, w_mult=mult)
            g = init_from_packets(cfg, st)
            g, _ = evolve_lattice(cfg, g, 64 * cfg.dt)
            ratios.append(diagonal_cusp_ratio(cfg, g))
        assert ratios[0] < ratios[1] < ratios[2]
        assert abs(ratios[2] - 1.0) < abs(ratios[0] - 1.0)
