"""Combinatorial and algebraic core of the delta-gas Bethe ansatz.

Everything here is exact algebra: permutations of particle labels in
one-line notation, their inversions, the two-body scattering factor

    S(k) = -(c - ik) / (c + ik),        c > 0,

and the permutation amplitudes A_sigma, defined as the product of
S(k_alpha - k_beta) over all inversions (alpha, beta) of sigma.  For
real momenta every factor has unit modulus, so the amplitudes live on
the unit circle; the adjacent-transposition recursion

    A_{T_i sigma} = S(k_{sigma(i+1)} - k_{sigma(i)}) * A_sigma

is what makes the permutation-sum wavefunction satisfy the contact
boundary condition, and is exposed here as a testable residual.

All functions are pure; values are immutable after construction.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import permutations as _lex_perms

import numpy as np

__all__ = [
    "PoleProximityError",
    "ScatteringContext",
    "Permutation",
    "all_permutations",
    "inversions",
    "inversion_count",
    "adjacent_transpose",
    "s_factor",
    "pair_factor",
    "amplitude",
    "recursion_residual",
    "pair_matrix",
]


class PoleProximityError(ValueError):
    """A momentum difference came too close to the S-matrix pole at k = ic."""


@dataclass(frozen=True)
class ScatteringContext:
    """Repulsive coupling strength and the pole guard for S(k).

    The coupling is dimensionless in units where 2m = 1 and hbar = 1.
    Only the repulsive case c > 0 is admitted.  ``pole_guard`` is the
    radius around the pole k = ic (relative to c) inside which
    evaluation is refused; real momenta never trigger it.
    """

    c: float
    pole_guard: float = 1e-8

    def __post_init__(self):
        if not np.isfinite(self.c) or self.c <= 0.0:
            raise ValueError(f"coupling must be finite and > 0, got {self.c}")
        if self.pole_guard < 0.0:
            raise ValueError("pole_guard must be nonnegative")


@dataclass(frozen=True)
class Permutation:
    """Element of S_N in one-line notation, entries are the values 1..N."""

    entries: tuple[int, ...]

    def __post_init__(self):
        n = len(self.entries)
        if n < 1:
            raise ValueError("permutation must have at least one entry")
        if sorted(self.entries) != list(range(1, n + 1)):
            raise ValueError(f"not a permutation of 1..{n}: {self.entries}")

    @property
    def n(self) -> int:
        return len(self.entries)

    @classmethod
    def identity(cls, n: int) -> "Permutation":
        return cls(tuple(range(1, n + 1)))

    def __call__(self, i: int) -> int:
        """Value in slot i (1-based): sigma(i)."""
        return self.entries[i - 1]

    def inverse(self) -> "Permutation":
        inv = [0] * self.n
        for slot, val in enumerate(self.entries, start=1):
            inv[val - 1] = slot
        return Permutation(tuple(inv))


def all_permutations(n: int) -> list[Permutation]:
    """All of S_n in lexicographic one-line order (the summation order)."""
    return [Permutation(p) for p in _lex_perms(range(1, n + 1))]


def inversions(sigma: Permutation) -> list[tuple[int, int]]:
    """Ordered value pairs (sigma(i), sigma(j)) with i < j and sigma(i) > sigma(j).

    Enumerated in lexicographic slot order (i, then j), which fixes the
    accumulation order of amplitude products and makes them reproducible.
    """
    e = sigma.entries
    n = len(e)
    return [(e[i], e[j]) for i in range(n) for j in range(i + 1, n) if e[i] > e[j]]


def inversion_count(sigma: Permutation) -> int:
    e = sigma.entries
    n = len(e)
    return sum(1 for i in range(n) for j in range(i + 1, n) if e[i] > e[j])


def adjacent_transpose(sigma: Permutation, i: int) -> Permutation:
    """Swap the entries in slots i and i+1 (1-based); changes inv by exactly 1."""
    if not 1 <= i <= sigma.n - 1:
        raise IndexError(f"slot index {i} out of range 1..{sigma.n - 1}")
    e = list(sigma.entries)
    e[i - 1], e[i] = e[i], e[i - 1]
    return Permutation(tuple(e))


def s_factor(k, ctx: ScatteringContext):
    """Two-body scattering factor S(k) = -(c - ik)/(c + ik).

    Accepts a scalar or ndarray momentum difference, real or complex.
    For real k the result has unit modulus.  Raises PoleProximityError
    if any k comes within ``ctx.pole_guard * c`` of the pole at k = ic,
    which signals an invalid contour or parameter choice.
    """
    c = ctx.c
    k = np.asarray(k)
    if np.iscomplexobj(k):
        guard = ctx.pole_guard * c
        if np.any(np.abs(k - 1j * c) < guard):
            raise PoleProximityError(
                f"momentum difference within {guard:g} of the pole at {c}i"
            )
    val = -(c - 1j * k) / (c + 1j * k)
    return val if val.ndim else complex(val)


def pair_factor(ka, kb, ctx: ScatteringContext):
    """S_{alpha beta} = S(k_alpha - k_beta)."""
    return s_factor(np.asarray(ka) - np.asarray(kb), ctx)


def amplitude(sigma: Permutation, k, ctx: ScatteringContext) -> complex:
    """A_sigma: product of S(k_alpha - k_beta) over the inversions of sigma.

    ``k`` holds the N momenta, indexed by particle label (k[0] is k_1).
    Factors are multiplied in the fixed inversion enumeration order so
    the result is bit-reproducible.  Unit modulus for real momenta.
    """
    k = np.asarray(k)
    if k.shape != (sigma.n,):
        raise ValueError(f"expected {sigma.n} momenta, got shape {k.shape}")
    val = 1.0 + 0.0j
    for alpha, beta in inversions(sigma):
        val *= s_factor(k[alpha - 1] - k[beta - 1], ctx)
    return val


def recursion_residual(sigma: Permutation, i: int, k, ctx: ScatteringContext) -> float:
    """|A_{T_i sigma} - S(k_{sigma(i+1)} - k_{sigma(i)}) * A_sigma|.

    Exact identity of the construction; any nonzero value is rounding.
    """
    k = np.asarray(k)
    left = amplitude(adjacent_transpose(sigma, i), k, ctx)
    right = s_factor(k[sigma(i + 1) - 1] - k[sigma(i) - 1], ctx) * amplitude(sigma, k, ctx)
    return abs(left - right)


def pair_matrix(nodes: np.ndarray, ctx: ScatteringContext) -> np.ndarray:
    """Matrix S[a, b] = S(nodes[a] - nodes[b]) on a real momentum grid."""
    return s_factor(nodes[:, None] - nodes[None, :], ctx)
