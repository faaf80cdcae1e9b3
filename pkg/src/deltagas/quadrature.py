"""Truncated momentum grids and deterministic tensor-product integration.

Momentum integrals here always come with the measure dk/(2pi) per
dimension, and their integrands always carry Gaussian damping
exp(-eta_eff * k^2), either from the imaginary-time regulator or from
wave-packet envelopes.  A uniform trapezoid grid on an analytic,
exponentially damped integrand converges geometrically, so the whole
grid design reduces to two numbers:

* the truncation radius ``k_max = sqrt(log(1/eps)/eta_eff)``, which
  bounds the discarded Gaussian tail by eps, and
* the spacing ``dk``, which must both keep the first aliased position
  image out of reach (a uniform grid represents positions modulo
  2*pi/dk, and the quadratic phase exp(-i t k^2) drifts the effective
  position by up to 2*k_max*|tau|) and resolve the fastest oscillation
  to a quarter period.

Gauss-Hermite would be the textbook choice for the damping weight, but
the integrands also contain non-entire scattering factors, which kills
Hermite optimality; the uniform grid keeps node reuse trivial across
the N! permutation terms.

Summation is compensated (Kahan) over blocks traversed in a fixed
lexicographic order, last index fastest, so results are reproducible
bit-for-bit across runs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import product as _iproduct

import numpy as np

__all__ = [
    "GridInfeasibleError",
    "NonFiniteIntegrandError",
    "QuadratureGrid",
    "DampingBudget",
    "uniform_grid",
    "build_grid",
    "integrate_nd",
    "KahanSum",
]

TWO_PI = 2.0 * math.pi


class GridInfeasibleError(ValueError):
    """The requested accuracy needs more nodes than the configured ceiling."""


class NonFiniteIntegrandError(FloatingPointError):
    """The integrand returned NaN/Inf; carries the offending node."""

    def __init__(self, message: str, node=None):
        super().__init__(message)
        self.node = node


class KahanSum:
    """Compensated accumulator for complex values."""

    __slots__ = ("value", "_comp")

    def __init__(self):
        self.value = 0.0 + 0.0j
        self._comp = 0.0 + 0.0j

    def add(self, term: complex) -> None:
        y = term - self._comp
        t = self.value + y
        self._comp = (t - self.value) - y
        self.value = t


@dataclass(frozen=True)
class QuadratureGrid:
    """Symmetric uniform grid on [-k_max, k_max] with trapezoid/(2pi) weights.

    ``n_k`` is odd so k = 0 is a node.  ``weights`` sum to 2*k_max/(2pi).
    """

    k_max: float
    n_k: int
    nodes: np.ndarray
    weights: np.ndarray

    def __post_init__(self):
        self.nodes.flags.writeable = False
        self.weights.flags.writeable = False

    @property
    def dk(self) -> float:
        return 2.0 * self.k_max / (self.n_k - 1)

    def echo(self) -> dict:
        """Parameter summary for result manifests."""
        return {"k_max": self.k_max, "n_k": self.n_k, "dk": self.dk}


def uniform_grid(k_max: float, n_k: int) -> QuadratureGrid:
    if k_max <= 0.0:
        raise ValueError(f"k_max must be positive, got {k_max}")
    if n_k < 3 or n_k % 2 == 0:
        raise ValueError(f"n_k must be odd and >= 3, got {n_k}")
    nodes = np.linspace(-k_max, k_max, n_k)
    weights = np.full(n_k, nodes[1] - nodes[0])
    weights[0] *= 0.5
    weights[-1] *= 0.5
    weights /= TWO_PI
    return QuadratureGrid(k_max=float(k_max), n_k=int(n_k), nodes=nodes, weights=weights)


@dataclass(frozen=True)
class DampingBudget:
    """What the integrand guarantees, and what the grid must deliver.

    eta_eff       Gaussian damping coefficient in exp(-eta_eff k^2); > 0.
    L_max         largest |x - y| position extent the grid must represent.
    eps_quad      target truncation/aliasing tolerance, in (0, 1e-2].
    t_scale       oscillatory-time scale of the quadratic phase (|t|);
                  combined with eta_eff it sets the stationary-phase
                  position drift 2*k_max*|tau|.
    k_center_span largest |p| by which the damping Gaussian is shifted
                  off the origin (wave-packet boosts); widens k_max.
    n_k_ceiling   refuse to build grids above this node count.
    """

    eta_eff: float
    L_max: float = 0.0
    eps_quad: float = 1e-10
    t_scale: float = 0.0
    k_center_span: float = 0.0
    n_k_ceiling: int = 4096

    def __post_init__(self):
        if not (self.eta_eff > 0.0 and np.isfinite(self.eta_eff)):
            raise ValueError(f"eta_eff must be finite and > 0, got {self.eta_eff}")
        if not (0.0 < self.eps_quad <= 1e-2):
            raise ValueError(f"eps_quad must lie in (0, 1e-2], got {self.eps_quad}")
        if self.L_max < 0.0 or self.t_scale < 0.0 or self.k_center_span < 0.0:
            raise ValueError("L_max, t_scale and k_center_span must be nonnegative")


def build_grid(budget: DampingBudget) -> QuadratureGrid:
    """Choose k_max and dk so truncation and aliasing stay below eps_quad.

    Raises GridInfeasibleError when the node count would exceed the
    ceiling; the caller must then raise eta, shrink extents, or raise
    the ceiling explicitly.
    """
    half_width = math.sqrt(math.log(1.0 / budget.eps_quad) / budget.eta_eff)
    k_max = budget.k_center_span + half_width

    # |tau| combines the oscillatory and damping time scales; both widen
    # the integrand's Fourier footprint around each position extent.
    tau_abs = math.hypot(budget.t_scale, budget.eta_eff)
    reach = budget.L_max + 2.0 * k_max * tau_abs
    dk_alias = math.pi / reach if reach > 0.0 else math.inf
    dk_osc = 0.25 * math.pi / reach if reach > 0.0 else math.inf
    dk = min(dk_alias, dk_osc)

    if math.isinf(dk):
        n_k = 3
    else:
        n_k = int(math.ceil(2.0 * k_max / dk)) + 1
        if n_k % 2 == 0:
            n_k += 1
        n_k = max(n_k, 3)
    if n_k > budget.n_k_ceiling:
        raise GridInfeasibleError(
            f"grid needs n_k={n_k} > ceiling {budget.n_k_ceiling}; "
            "raise eta, shrink position/time extents, or raise the ceiling"
        )
    return uniform_grid(k_max, n_k)


def integrate_nd(f, grid: QuadratureGrid, n: int) -> complex:
    """Tensor-product integral of f over n momentum dimensions.

    ``f`` must accept an (M, n) array of momentum vectors and return an
    (M,) complex array.  The tensor grid is traversed with the last
    index fastest: the leading n-1 indices run lexicographically and
    each final-axis row is evaluated in one vectorized call.  Block sums
    are combined with compensated summation.

    A non-finite integrand value aborts with the offending node.
    """
    if n < 1:
        raise ValueError("dimension must be >= 1")
    nodes, weights = grid.nodes, grid.weights
    m = grid.n_k
    acc = KahanSum()
    row = np.empty((m, n), dtype=float)
    row[:, n - 1] = nodes
    for lead in _iproduct(range(m), repeat=n - 1):
        w_lead = 1.0
        for axis, idx in enumerate(lead):
            row[:, axis] = nodes[idx]
            w_lead *= weights[idx]
        vals = np.asarray(f(row))
        if vals.shape != (m,):
            raise ValueError(f"integrand returned shape {vals.shape}, expected ({m},)")
        if not np.all(np.isfinite(vals)):
            bad = int(np.flatnonzero(~np.isfinite(vals))[0])
            node = tuple(row[bad])
            raise NonFiniteIntegrandError(
                f"non-finite integrand at k = {node}", node=node
            )
        acc.add(w_lead * np.sum(weights * vals))
    return acc.value
