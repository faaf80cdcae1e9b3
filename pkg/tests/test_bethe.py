"""Algebraic core: permutations, inversions, scattering factors, amplitudes."""

import numpy as np
import pytest

from deltagas.bethe import (
    Permutation,
    PoleProximityError,
    ScatteringContext,
    adjacent_transpose,
    all_permutations,
    amplitude,
    inversion_count,
    inversions,
    pair_factor,
    pair_matrix,
    recursion_residual,
    s_factor,
)


class TestScatteringFactor:
    def test_at_zero_is_minus_one(self):
        for c in (0.1, 1.0, 7.3):
            assert s_factor(0.0, ScatteringContext(c)) == pytest.approx(-1.0, abs=1e-15)

    def test_k2_c2_is_i(self):
        # -(2-2i)/(2+2i) multiplied out by hand
        assert s_factor(2.0, ScatteringContext(2.0)) == pytest.approx(1j)

    def test_unit_modulus_on_real_axis(self):
        ctx = ScatteringContext(1.0)
        for k in (0.5, 1.0, 10.0):
            assert abs(abs(s_factor(k, ctx)) - 1.0) <= 1e-14

    def test_unit_modulus_sweep(self):
        rng = np.random.default_rng(7)
        k = rng.uniform(-50, 50, size=10_000)
        s = s_factor(k, ScatteringContext(0.7))
        assert np.max(np.abs(np.abs(s) - 1.0)) <= 1e-14

    def test_inverse_pair_identity(self):
        rng = np.random.default_rng(8)
        ctx = ScatteringContext(2.4)
        ka = rng.uniform(-5, 5, 200)
        kb = rng.uniform(-5, 5, 200)
        prod = pair_factor(ka, kb, ctx) * pair_factor(kb, ka, ctx)
        assert np.max(np.abs(prod - 1.0)) <= 1e-14

    def test_pair_factor_matches_s_of_difference(self):
        ctx = ScatteringContext(2.0)
        assert pair_factor(3.0, 1.0, ctx) == s_factor(2.0, ctx)
        assert pair_factor(1.5, 1.5, ctx) == -1.0 + 0.0j

    def test_pole_guard(self):
        ctx = ScatteringContext(1.0)
        with pytest.raises(PoleProximityError):
            s_factor(1j * (1.0 + 1e-12), ctx)
        # just outside the guard radius is fine
        s_factor(1j * 1.001, ctx)

    def test_coupling_validation(self):
        for bad in (0.0, -1.0, float("nan"), float("inf")):
            with pytest.raises(ValueError):
                ScatteringContext(bad)


class TestPermutations:
    def test_identity_has_no_inversions(self):
        for n in (1, 3, 6):
            assert inversions(Permutation.identity(n)) == []

    def test_231_inversions(self):
        assert inversions(Permutation((2, 3, 1))) == [(2, 1), (3, 1)]

    def test_full_reversal(self):
        sig = Permutation((3, 2, 1))
        assert inversions(sig) == [(3, 2), (3, 1), (2, 1)]
        assert inversion_count(sig) == 3

    def test_lexicographic_enumeration(self):
        perms = all_permutations(3)
        assert [p.entries for p in perms] == [
            (1, 2, 3), (1, 3, 2), (2, 1, 3), (2, 3, 1), (3, 1, 2), (3, 2, 1),
        ]

    def test_adjacent_transpose(self):
        assert adjacent_transpose(Permutation((1, 2)), 1).entries == (2, 1)
        assert adjacent_transpose(Permutation((2, 3, 1)), 2).entries == (2, 1, 3)
        assert inversion_count(Permutation((2, 1, 3))) == 1
        assert inversion_count(Permutation((2, 3, 1))) == 2

    def test_transpose_changes_inversions_by_one(self):
        rng = np.random.default_rng(3)
        for _ in range(50):
            n = int(rng.integers(2, 7))
            sig = Permutation(tuple(rng.permutation(n) + 1))
            i = int(rng.integers(1, n))
            assert abs(inversion_count(adjacent_transpose(sig, i)) - inversion_count(sig)) == 1

    def test_transpose_index_range(self):
        with pytest.raises(IndexError):
            adjacent_transpose(Permutation((1, 2, 3)), 3)
        with pytest.raises(IndexError):
            adjacent_transpose(Permutation((1, 2, 3)), 0)

    def test_invalid_entries_rejected(self):
        with pytest.raises(ValueError):
            Permutation((1, 1, 2))
        with pytest.raises(ValueError):
            Permutation((0, 1))
        with pytest.raises(ValueError):
            Permutation(())

    def test_inverse(self):
        sig = Permutation((2, 3, 1))
        assert sig.inverse().entries == (3, 1, 2)

    def test_reversal_composition_inversion_count(self):
        for n in (2, 3, 4, 5):
            full = n * (n - 1) // 2
            for sig in all_permutations(n):
                rev = Permutation(tuple(reversed(sig.entries)))
                assert inversion_count(sig) + inversion_count(rev) == full


class TestAmplitude:
    def test_identity_amplitude_is_one(self):
        ctx = ScatteringContext(1.0)
        k = np.array([0.1, 2.2, -0.7])
        assert amplitude(Permutation.identity(3), k, ctx) == 1.0 + 0.0j

    def test_231_worked_value(self):
        # S(2)S(4) at c = 2: i * (0.6 + 0.8i) = -0.8 + 0.6i
        val = amplitude(Permutation((2, 3, 1)), np.array([0.0, 2.0, 4.0]), ScatteringContext(2.0))
        assert val == pytest.approx(-0.8 + 0.6j, abs=1e-14)

    def test_unit_modulus_for_real_momenta(self):
        rng = np.random.default_rng(11)
        ctx = ScatteringContext(1.0)
        for sig in all_permutations(4):
            k = rng.uniform(-3, 3, 4)
            assert abs(abs(amplitude(sig, k, ctx)) - 1.0) <= 1e-14

    def test_momentum_count_checked(self):
        with pytest.raises(ValueError):
            amplitude(Permutation((1, 2)), np.array([1.0, 2.0, 3.0]), ScatteringContext(1.0))

    def test_impenetrable_sign_limit(self):
        k = np.array([0.3, 0.9, 1.8, 2.1])
        max_dk = max(abs(a - b) for a in k for b in k)
        for sig in all_permutations(4):
            sign = (-1.0) ** inversion_count(sig)
            prev = None
            for m in range(2, 7):
                c = 10.0**m
                dev = abs(amplitude(sig, k, ScatteringContext(c)) - sign)
                assert dev <= 10.0 * max_dk / c
                if inversion_count(sig) > 0:
                    if prev is not None:
                        assert dev < prev
                    prev = dev
                else:
                    assert dev == 0.0


class TestRecursion:
    def test_n2_definition(self):
        ctx = ScatteringContext(1.7)
        k = np.array([0.4, -1.1])
        assert recursion_residual(Permutation((1, 2)), 1, k, ctx) <= 1e-14

    def test_n3_example(self):
        ctx = ScatteringContext(1.0)
        k = np.array([0.3, -1.2, 2.5])
        assert recursion_residual(Permutation((2, 3, 1)), 1, k, ctx) <= 1e-13

    def test_exhaustive_s4(self):
        rng = np.random.default_rng(5)
        ctx = ScatteringContext(1.3)
        worst = 0.0
        for k in rng.uniform(-4, 4, size=(20, 4)):
            for sig in all_permutations(4):
                for i in range(1, 4):
                    worst = max(worst, recursion_residual(sig, i, k, ctx))
        assert worst <= 1e-12

    def test_randomized_s6(self):
        rng = np.random.default_rng(6)
        ctx = ScatteringContext(0.8)
        for _ in range(100):
            sig = Permutation(tuple(rng.permutation(6) + 1))
            i = int(rng.integers(1, 6))
            k = rng.uniform(-4, 4, 6)
            scale = max(1.0, abs(amplitude(sig, k, ctx)))
            assert recursion_residual(sig, i, k, ctx) <= 1e-12 * scale


def test_pair_matrix_layout():
    nodes = np.array([-1.0, 0.0, 2.0])
    ctx = ScatteringContext(1.0)
    mat = pair_matrix(nodes, ctx)
    assert mat[0, 2] == s_factor(-3.0, ctx)
    assert mat[2, 0] == s_factor(3.0, ctx)
    assert np.all(np.diag(mat) == -1.0)
