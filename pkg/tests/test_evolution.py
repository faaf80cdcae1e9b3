"""Packet evolution: spectral vs convolution routes and observables."""

import numpy as np
import pytest

from deltagas.packets import (
    GaussianPacketSpec,
    InitialState,
    free_packet_evolved,
    symmetrized_state_value,
)
from deltagas.evolution import (
    evolve_convolution,
    evolve_spectral,
    evolve_spectral_grid,
    norm_squared,
    pair_density,
)


def separated_pair(a=0.25, gap=4.0, p=0.0):
    return InitialState(
        (GaussianPacketSpec(a, 0.0, p), GaussianPacketSpec(a, gap, -p))
    )


class TestSingleParticle:
    def test_spectral_matches_closed_form(self):
        pk = GaussianPacketSpec(a=0.3, y0=0.5, p=1.2)
        st = InitialState((pk,))
        xs = np.linspace(-3, 6, 41)[:, None]
        ev = evolve_spectral(xs, st, t=0.8, c=1.0, eps=1e-12)
        assert np.max(np.abs(ev.values - free_packet_evolved(xs[:, 0], 0.8, pk))) <= 1e-8

    def test_convolution_matches_spectral(self):
        pk = GaussianPacketSpec(a=0.3, y0=0.0, p=0.6)
        st = InitialState((pk,))
        xs = np.linspace(-3, 4, 29)[:, None]
        ec = evolve_convolution(xs, st, t=0.5, eta=0.05, c=1.0, eps=1e-12)
        es = evolve_spectral(xs, st, t=0.5, c=1.0, eta=0.05, eps=1e-12)
        scale = np.max(np.abs(es.values))
        assert np.max(np.abs(ec.values - es.values)) / scale <= 1e-6

    def test_momentum_boost_covariance(self):
        # evolving with p then |psi|^2 equals the p=0 density shifted by 2pt
        a, t, p = 0.35, 0.6, 1.1
        xs = np.linspace(-5, 5, 201)
        boosted = evolve_spectral(
            (xs + 2 * p * t)[:, None], InitialState((GaussianPacketSpec(a, 0.0, p),)),
            t=t, c=1.0, eps=1e-12,
        )
        rest = evolve_spectral(
            xs[:, None], InitialState((GaussianPacketSpec(a, 0.0, 0.0),)),
            t=t, c=1.0, eps=1e-12,
        )
        assert np.max(np.abs(np.abs(boosted.values) ** 2 - np.abs(rest.values) ** 2)) <= 1e-10

    def test_norm_exact_all_times(self):
        st = InitialState((GaussianPacketSpec(0.3, 0.0, 0.9),))
        for t in (0.0, 0.7, 1.4):
            ev = evolve_spectral_grid(
                np.linspace(-36, 39, 3001), st, t=t, c=1.0, eps=1e-12,
                n_k_ceiling=8192,
            )
            assert norm_squared(ev) == pytest.approx(1.0, abs=1e-6)


class TestTimeZeroRecovery:
    def test_matches_free_state_on_ordered_sector(self):
        st = separated_pair()
        axis = np.linspace(-2.5, 6.5, 61)
        ev = evolve_spectral_grid(axis, st, t=0.0, c=1.0, eps=1e-10)
        x1, x2 = np.meshgrid(axis, axis, indexing="ij")
        free = symmetrized_state_value(np.stack([x1, x2], axis=-1), st)
        mask = x1 <= x2
        err = np.max(np.abs(ev.values - free)[mask]) / np.max(np.abs(free))
        assert err <= 1e-3

    def test_truncation_bound_recorded(self):
        st = separated_pair()
        ev = evolve_spectral(np.array([[0.0, 4.0]]), st, t=0.0, c=1.0)
        assert ev.truncation_bound == pytest.approx(st.truncation_bound())
        assert ev.min_gap_ratio == pytest.approx(16.0)

    def test_overlap_warning_on_close_packets(self):
        st = InitialState(
            (GaussianPacketSpec(0.5, 0.0), GaussianPacketSpec(0.5, 2.0))
        )
        with pytest.warns(RuntimeWarning):
            evolve_spectral(np.array([[0.0, 2.0]]), st, t=0.0, c=1.0)


class TestTwoPathAgreement:
    def test_two_body_routes_agree(self):
        st = separated_pair()
        sub = np.linspace(-1.5, 5.5, 11)
        p1, p2 = np.meshgrid(sub, sub, indexing="ij")
        pts = np.stack([p1[p1 <= p2], p2[p1 <= p2]], axis=-1)
        es = evolve_spectral(pts, st, t=0.25, c=1.0, eta=0.02, eps=1e-10)
        ec = evolve_convolution(
            pts, st, t=0.25, eta=0.02, c=1.0, eps=1e-10,
            y_axis=np.linspace(-2.5, 6.5, 201),
        )
        rel = np.max(np.abs(es.values - ec.values)) / np.max(np.abs(es.values))
        assert rel <= 1e-2

    def test_convolution_smoothing_vanishes_with_eta(self):
        st = separated_pair()
        pts = np.array([[0.0, 4.0], [0.3, 3.8], [-0.4, 4.2]])
        free = symmetrized_state_value(pts, st)
        errs = []
        for eta in (0.08, 0.04, 0.02):
            ec = evolve_convolution(
                pts, st, t=0.0, eta=eta, c=1.0, eps=1e-11,
                y_axis=np.linspace(-2.5, 6.5, 241),
            )
            errs.append(np.max(np.abs(ec.values - free)))
        assert errs[0] > errs[1] > errs[2]

    def test_convolution_needs_regulator(self):
        st = separated_pair()
        with pytest.raises(ValueError):
            evolve_convolution(np.array([[0.0, 4.0]]), st, t=0.1, eta=0.0, c=1.0)


class TestThreeParticles:
    def test_t0_recovery_and_norm(self):
        st = InitialState(
            (
                GaussianPacketSpec(0.25, -3.0),
                GaussianPacketSpec(0.25, 0.0),
                GaussianPacketSpec(0.25, 3.0),
            )
        )
        axis = np.linspace(-5.5, 5.5, 89)
        ev = evolve_spectral_grid(axis, st, t=0.0, c=1.0, eps=1e-8)
        mesh = np.meshgrid(axis, axis, axis, indexing="ij")
        pts = np.stack(mesh, axis=-1)
        free = symmetrized_state_value(pts, st)
        ordered = (mesh[0] <= mesh[1]) & (mesh[1] <= mesh[2])
        err = np.max(np.abs(ev.values - free)[ordered]) / np.max(np.abs(free))
        assert err <= 1e-3
        assert norm_squared(ev) == pytest.approx(1.0, abs=1e-3)

    def test_convolution_matches_spectral(self):
        st = InitialState(
            (
                GaussianPacketSpec(0.3, -2.5),
                GaussianPacketSpec(0.3, 0.0),
                GaussianPacketSpec(0.3, 2.5),
            )
        )
        pts = np.array([[-2.5, 0.0, 2.5], [-2.2, 0.3, 2.6], [-2.8, -0.3, 2.2]])
        eta = 0.4
        es = evolve_spectral(pts, st, t=0.1, c=1.0, eta=eta, eps=1e-8)
        ec = evolve_convolution(
            pts, st, t=0.1, eta=eta, c=1.0, eps=1e-8,
            y_axis=np.linspace(-5.0, 5.0, 121),
        )
        rel = np.max(np.abs(es.values - ec.values)) / np.max(np.abs(es.values))
        assert rel <= 1e-2


class TestObservables:
    def test_contact_suppression_grows_with_coupling(self):
        st = InitialState(
            (GaussianPacketSpec(0.25, -1.5, 1.0), GaussianPacketSpec(0.25, 1.5, -1.0))
        )
        pts = np.array([[0.0, 0.0]])
        weak = evolve_spectral(pts, st, t=0.75, c=1e-6, eps=1e-10)
        strong = evolve_spectral(pts, st, t=0.75, c=100.0, eps=1e-10)
        assert abs(strong.values[0]) ** 2 <= 0.05 * abs(weak.values[0]) ** 2

    def test_pair_density_mirror_and_positivity(self):
        st = separated_pair()
        ev = evolve_spectral_grid(np.linspace(-2, 6, 41), st, t=0.3, c=1.0)
        axis, dens = pair_density(ev)
        assert np.all(dens >= 0.0)
        assert np.array_equal(dens, dens.T)

    def test_norm_coverage_warning(self):
        st = separated_pair()
        ev = evolve_spectral_grid(np.linspace(-0.5, 4.5, 41), st, t=0.0, c=1.0)
        with pytest.warns(RuntimeWarning):
            norm_squared(ev)

    def test_norm_requires_grid_state(self):
        st = separated_pair()
        ev = evolve_spectral(np.array([[0.0, 4.0]]), st, t=0.0, c=1.0)
        with pytest.raises(ValueError):
            norm_squared(ev)
