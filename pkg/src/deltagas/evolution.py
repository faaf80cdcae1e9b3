"""Evolution of Gaussian-packet initial states under the delta gas.

Two independent routes to the same wavefunction:

* `evolve_spectral` pushes the source integral through the propagator
  analytically.  Because prod_j e^{-i k_sigma(j) y_sigma(j)} is the same
  for every permutation, convolving the permutation-sum kernel with a
  product of packets just replaces each plane-wave source factor by the
  packet's Fourier transform:

      Psi(x; t) = sum_sigma int dk/(2pi)^N A_sigma(k)
                  * prod_j e^{i k_sigma(j) x_j}
                  * prod_m phihat_m(k_m) * e^{-i tau sum k^2}.

  The packet envelopes e^{-a^2 (k-p)^2} damp every momentum axis, so
  eta = 0 is allowed here.  The result is the evolution of the ordered
  product state; it matches the symmetrized free state on the ordered
  sector up to the recorded exchange-truncation bound.

* `evolve_convolution` quadratures the source integral directly over
  the ordered sector y_1 < ... < y_N against the eta-regularized
  propagator.  The discrete double sum (y grid x k grid) is evaluated
  k-outermost -- transform the weighted source field once, then sweep
  permutations -- which is an exact reordering of the same finite sum.

Observables: ordered-sector norm (conserved because the contact
condition kills the probability flux through the coincidence planes)
and the mirrored two-particle density.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .bethe import ScatteringContext, all_permutations, inversions, pair_matrix
from .packets import InitialState, packet_fourier, packet_value
from .quadrature import DampingBudget, QuadratureGrid, build_grid
from .propagator import (
    permutation_field_sum,
    permutation_points_sum,
    symmetrize_field,
)

__all__ = [
    "EvolvedState",
    "evolve_spectral",
    "evolve_spectral_grid",
    "evolve_convolution",
    "norm_squared",
    "pair_density",
]


@dataclass(frozen=True)
class EvolvedState:
    """Wavefunction samples plus the metadata that generated them.

    ``kind`` is "points" (values indexed like ``points``) or "grid"
    (values on the tensor power of ``axis``; raw ordered-sector formula,
    see `propagator.symmetrize_field` for the symmetric extension).
    """

    values: np.ndarray
    kind: str
    t: float
    eta: float
    c: float
    grid: QuadratureGrid
    truncation_bound: float
    min_gap_ratio: float
    points: np.ndarray | None = None
    axis: np.ndarray | None = None

    def __post_init__(self):
        if not np.all(np.isfinite(self.values)):
            raise FloatingPointError("evolved state contains non-finite samples")


def _evolve_budget(
    state: InitialState,
    t: float,
    eta: float,
    x_extent: float,
    eps: float,
    n_k_ceiling: int,
) -> DampingBudget:
    centers = state.centers
    span = x_extent + float(np.max(np.abs(centers)))
    p_span = max(abs(pk.p) for pk in state.packets)
    return DampingBudget(
        eta_eff=state.width**2 + eta,
        L_max=span,
        eps_quad=eps,
        t_scale=t,
        k_center_span=p_span,
        n_k_ceiling=n_k_ceiling,
    )


def _spectral_profiles(state: InitialState, tau: complex, grid: QuadratureGrid):
    damp = grid.weights * np.exp(-1j * tau * grid.nodes**2)
    return [damp * packet_fourier(grid.nodes, pk) for pk in state.packets]


def evolve_spectral(
    xs,
    state: InitialState,
    t: float,
    c: float,
    *,
    eta: float = 0.0,
    grid: QuadratureGrid | None = None,
    eps: float = 1e-10,
    n_k_ceiling: int = 4096,
) -> EvolvedState:
    """Spectral evolution at a list of target points (shape (M, N))."""
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    if xs.shape[1] != state.n:
        raise ValueError(f"target points must have {state.n} coordinates")
    if t < 0.0 or eta < 0.0:
        raise ValueError("t and eta must be >= 0")
    state.warn_if_overlapping()
    if grid is None:
        grid = build_grid(
            _evolve_budget(state, t, eta, float(np.max(np.abs(xs))), eps, n_k_ceiling)
        )
    tau = t - 1j * eta
    profiles = _spectral_profiles(state, tau, grid)
    values = permutation_points_sum(xs, profiles, grid, ScatteringContext(c))
    return EvolvedState(
        values=values,
        kind="points",
        t=t,
        eta=eta,
        c=c,
        grid=grid,
        truncation_bound=state.truncation_bound(),
        min_gap_ratio=state.min_gap_ratio,
        points=xs,
    )


def evolve_spectral_grid(
    axis,
    state: InitialState,
    t: float,
    c: float,
    *,
    eta: float = 0.0,
    grid: QuadratureGrid | None = None,
    eps: float = 1e-10,
    n_k_ceiling: int = 4096,
) -> EvolvedState:
    """Spectral evolution on the tensor power of one shared 1-D axis."""
    axis = np.asarray(axis, dtype=float)
    if axis.ndim != 1 or axis.size < 2:
        raise ValueError("axis must be 1-D with at least two samples")
    if state.n > 3:
        raise ValueError("tensor-grid evolution supports N <= 3")
    if t < 0.0 or eta < 0.0:
        raise ValueError("t and eta must be >= 0")
    state.warn_if_overlapping()
    if grid is None:
        grid = build_grid(
            _evolve_budget(state, t, eta, float(np.max(np.abs(axis))), eps, n_k_ceiling)
        )
    tau = t - 1j * eta
    profiles = _spectral_profiles(state, tau, grid)
    phase = np.exp(1j * np.outer(axis, grid.nodes))
    phases = [phase] * state.n
    values = permutation_field_sum(phases, profiles, grid, ScatteringContext(c))
    return EvolvedState(
        values=values,
        kind="grid",
        t=t,
        eta=eta,
        c=c,
        grid=grid,
        truncation_bound=state.truncation_bound(),
        min_gap_ratio=state.min_gap_ratio,
        axis=axis,
    )


def _simplex_source(state: InitialState, y_axis: np.ndarray):
    """Weighted ordered-sector source field W(y) * prod_m phi_m(y_m).

    Trapezoid weights per axis; the ordered region y_1 <= ... <= y_N is
    selected with 1/multiplicity! factors on coincidence boundaries.
    """
    n = state.n
    w = np.full(y_axis.size, y_axis[1] - y_axis[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    vals = [w * packet_value(y_axis, pk) for pk in state.packets]
    field = vals[0]
    for v in vals[1:]:
        field = np.multiply.outer(field, v)
    if n == 1:
        return field
    idx = np.indices(field.shape)
    ordered = np.ones(field.shape, dtype=float)
    for axis in range(n - 1):
        ordered *= idx[axis] <= idx[axis + 1]
        ordered /= 1.0 + (idx[axis] == idx[axis + 1])
    if n == 3:
        # triple coincidence sits on two adjacent ties; 1/2 * 1/2 -> 1/6
        triple = (idx[0] == idx[1]) & (idx[1] == idx[2])
        ordered[triple] *= 2.0 / 3.0
    return field * ordered


def default_source_axis(state: InitialState, points: int = 161) -> np.ndarray:
    """Source-integration axis covering every packet to ~8 widths."""
    pad = 8.0 * state.width
    lo = float(np.min(state.centers)) - pad
    hi = float(np.max(state.centers)) + pad
    return np.linspace(lo, hi, points)


def evolve_convolution(
    xs,
    state: InitialState,
    t: float,
    eta: float,
    c: float,
    *,
    grid: QuadratureGrid | None = None,
    y_axis: np.ndarray | None = None,
    eps: float = 1e-10,
    n_k_ceiling: int = 4096,
) -> EvolvedState:
    """Direct ordered-sector quadrature of the source integral (N <= 3).

    int_{y_1<...<y_N} G(x, y; t - i eta) prod_m phi_m(y_m) dy, with the
    eta-regularized propagator; eta must be positive here because the
    momentum damping comes from the regulator alone once the source
    integral is discretized.
    """
    xs = np.atleast_2d(np.asarray(xs, dtype=float))
    n = state.n
    if xs.shape[1] != n:
        raise ValueError(f"target points must have {n} coordinates")
    if n > 3:
        raise ValueError("convolution evolution supports N <= 3 (cost ceiling)")
    if eta <= 0.0:
        raise ValueError("convolution evolution needs eta > 0")
    if y_axis is None:
        y_axis = default_source_axis(state)
    y_axis = np.asarray(y_axis, dtype=float)
    if grid is None:
        span = float(np.max(np.abs(xs))) + float(np.max(np.abs(y_axis)))
        grid = build_grid(
            DampingBudget(
                eta_eff=eta, L_max=span, eps_quad=eps, t_scale=t,
                n_k_ceiling=n_k_ceiling,
            )
        )
    if n == 3 and grid.n_k > 256:
        raise ValueError(
            f"N=3 convolution needs n_k <= 256 (got {grid.n_k}); raise eta"
        )
    tau = t - 1j * eta
    nodes = grid.nodes
    ctx = ScatteringContext(c)

    source = _simplex_source(state, y_axis)
    # transform the source field axis by axis: sum_y e^{-i k y} source(y)
    e_y = np.exp(-1j * np.outer(y_axis, nodes))
    kern = np.asarray(source, dtype=complex)
    for _ in range(n):
        kern = np.tensordot(kern, e_y, axes=([0], [0]))
    damp = grid.weights * np.exp(-1j * tau * nodes**2)
    for axis in range(n):
        shape = [1] * n
        shape[axis] = nodes.size
        kern = kern * damp.reshape(shape)

    phases = [np.exp(1j * np.outer(xs[:, j], nodes)) for j in range(n)]
    values = np.zeros(xs.shape[0], dtype=complex)
    s_mat = pair_matrix(nodes, ctx) if n >= 2 else None
    for sigma in all_permutations(n):
        values = values + _convolution_sigma_term(
            kern, sigma, inversions(sigma), s_mat, phases, nodes
        )
    return EvolvedState(
        values=values,
        kind="points",
        t=t,
        eta=eta,
        c=c,
        grid=grid,
        truncation_bound=state.truncation_bound(),
        min_gap_ratio=state.min_gap_ratio,
        points=xs,
    )


def _convolution_sigma_term(kern, sigma, pairs, s_mat, phases, nodes):
    """sum_k kern(k) * A_sigma(k) * prod_m e^{i k_m x_sigma^{-1}(m)}."""
    n = kern.ndim
    inv = sigma.inverse().entries
    weight = kern
    for alpha, beta in pairs:
        a, b = alpha - 1, beta - 1
        # broadcast s_mat[i_a, i_b] into the tensor: reshaping keeps the
        # first matrix axis on the lower tensor axis, so transpose when
        # the row label alpha sits on the higher axis (always, for
        # inversions: alpha > beta).
        mat = s_mat if a < b else s_mat.T
        lo, hi = min(a, b), max(a, b)
        shape = [1] * n
        shape[lo] = nodes.size
        shape[hi] = nodes.size
        weight = weight * mat.reshape(shape)
    ops = [phases[inv[m] - 1] for m in range(n)]
    if n == 1:
        return ops[0] @ weight
    if n == 2:
        return np.sum((ops[0] @ weight) * ops[1], axis=1)
    # n == 3
    return np.einsum("abc,Za,Zb,Zc->Z", weight, *ops, optimize="greedy")


def norm_squared(state: EvolvedState) -> float:
    """Ordered-sector integral of |Psi|^2 on a grid state.

    Warns when boundary samples exceed 1e-6 of the peak (coverage) --
    mass may then be leaking out of the sampled window.
    """
    if state.kind != "grid":
        raise ValueError("norm_squared needs a grid state")
    axis = state.axis
    vals = state.values
    n = vals.ndim
    absq = np.abs(vals) ** 2
    w = np.full(axis.size, axis[1] - axis[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    if n == 1:
        peak = math.sqrt(float(np.max(absq)))
        edge = max(abs(vals[0]), abs(vals[-1]))
        if peak > 0 and edge > 1e-6 * peak:
            warnings.warn(
                f"boundary amplitude {edge:.2e} exceeds 1e-6 of peak "
                f"{peak:.2e}; norm may be under-covered",
                RuntimeWarning,
            )
        return float(np.sum(w * absq))
    idx = np.indices(vals.shape)
    ordered_mask = np.ones(vals.shape, dtype=bool)
    for dim in range(n - 1):
        ordered_mask &= idx[dim] <= idx[dim + 1]
    # coverage: only the outer boundary of the ordered sector matters
    # (x_1 at the lower edge, x_N at the upper edge); the raw field off
    # the sector is the analytic continuation and can be large.
    outer = ordered_mask & ((idx[0] == 0) | (idx[n - 1] == axis.size - 1))
    peak = math.sqrt(float(np.max(absq[ordered_mask])))
    edge = float(np.max(np.abs(vals[outer])))
    if peak > 0 and edge > 1e-6 * peak:
        warnings.warn(
            f"boundary amplitude {edge:.2e} exceeds 1e-6 of peak {peak:.2e}; "
            "norm may be under-covered",
            RuntimeWarning,
        )
    weight = np.ones(vals.shape)
    for dim in range(n):
        shape = [1] * n
        shape[dim] = axis.size
        weight = weight * w.reshape(shape)
    for dim in range(n - 1):
        weight *= idx[dim] <= idx[dim + 1]
        weight /= 1.0 + (idx[dim] == idx[dim + 1])
    if n == 3:
        triple = (idx[0] == idx[1]) & (idx[1] == idx[2])
        weight[triple] *= 2.0 / 3.0
    return float(np.sum(weight * absq))


def pair_density(state: EvolvedState):
    """|Psi|^2 on the full plane for N = 2, mirrored across the diagonal.

    Returns (axis, density); mirror symmetry is exact by construction
    and the density is nonnegative everywhere.
    """
    if state.kind != "grid" or state.values.ndim != 2:
        raise ValueError("pair_density needs an N = 2 grid state")
    sym = symmetrize_field(state.values)
    return state.axis, np.abs(sym) ** 2
