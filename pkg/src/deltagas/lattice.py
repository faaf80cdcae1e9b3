"""Brute-force two-particle lattice oracle.

Validates the Bethe evaluator end to end by solving the same dynamics
with none of its machinery: the delta interaction is mollified to a
unit-mass Gaussian of width w, the Hamiltonian

    H = -d^2/dx1^2 - d^2/dx2^2 + 2c * delta_w(x1 - x2)

is discretized with the 5-point Laplacian on a square with homogeneous
Dirichlet walls, and time stepping uses a symmetric split of Cayley
(Crank-Nicolson) half-steps,

    psi  <-  C_2(dt/2) C_1(dt) C_2(dt/2) psi,
    C_a(th) = (1 + i th H_a / 2)^(-1) (1 - i th H_a / 2),
    H_a = -d^2/dx_a^2 + V/2,

followed by projection onto the exchange-symmetric subspace (the
continuum flow commutes with particle exchange and the initial data is
symmetric, so the antisymmetric residue is pure splitting error).  Each
Cayley factor is exactly unitary and costs one batched tridiagonal
solve, so the discrete norm is conserved to roundoff per step and the
local error is O(dt^3), matching a monolithic Crank-Nicolson step.

The mollified potential is deliberately a different mechanism from the
contact boundary condition tested analytically elsewhere: agreement
between the two is evidence, not circularity.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .packets import InitialState, packet_value, free_packet_evolved
from .evolution import EvolvedState

__all__ = [
    "LatticeConfig",
    "GridState",
    "mollified_delta",
    "init_from_packets",
    "step",
    "evolve_lattice",
    "free_reference_field",
    "compare_fields",
    "compare_to_bethe",
    "diagonal_cusp_ratio",
]


@dataclass(frozen=True)
class LatticeConfig:
    """Square domain [-L, L]^2, n_x points per axis, step dt, mollifier w."""

    L: float
    n_x: int
    dt: float
    w: float
    c: float

    def __post_init__(self):
        if self.L <= 0 or self.n_x < 16:
            raise ValueError("need L > 0 and n_x >= 16")
        h = self.h
        if self.w < 2.0 * h:
            raise ValueError(f"mollifier width {self.w} under-resolved; need >= 2h = {2*h:g}")
        if not 0.0 < self.dt <= h * h * (1.0 + 1e-12):
            raise ValueError(f"dt must lie in (0, h^2 = {h*h:g}] for accuracy")
        if self.c < 0.0:
            raise ValueError("coupling must be >= 0 on the lattice")

    @property
    def h(self) -> float:
        return 2.0 * self.L / (self.n_x - 1)

    @property
    def axis(self) -> np.ndarray:
        return np.linspace(-self.L, self.L, self.n_x)


@dataclass
class GridState:
    """Complex field on the full n_x x n_x grid (zero Dirichlet ring)."""

    psi: np.ndarray
    t: float

    def symmetry_residual(self) -> float:
        scale = float(np.max(np.abs(self.psi)))
        if scale == 0.0:
            return 0.0
        return float(np.max(np.abs(self.psi - self.psi.T))) / scale

    def grid_norm(self, h: float) -> float:
        return float(np.sum(np.abs(self.psi) ** 2)) * h * h


def mollified_delta(u, w: float):
    """Unit-mass Gaussian approximation of the delta function."""
    u = np.asarray(u, dtype=float)
    return np.exp(-(u**2) / (2.0 * w * w)) / (w * math.sqrt(2.0 * math.pi))


def _potential(cfg: LatticeConfig) -> np.ndarray:
    ax = cfg.axis
    return 2.0 * cfg.c * mollified_delta(ax[:, None] - ax[None, :], cfg.w)


def init_from_packets(cfg: LatticeConfig, state: InitialState) -> GridState:
    """Symmetrized product packet on the grid, normalized to one.

    Fails if the packets do not fit: boundary amplitude must stay below
    1e-8 of the peak before the walls can be trusted.
    """
    if state.n != 2:
        raise ValueError("the lattice oracle is two-particle only")
    ax = cfg.axis
    p1 = packet_value(ax, state.packets[0])
    p2 = packet_value(ax, state.packets[1])
    psi = np.outer(p1, p2) + np.outer(p2, p1)
    peak = float(np.max(np.abs(psi)))
    edge = max(
        float(np.max(np.abs(psi[0, :]))),
        float(np.max(np.abs(psi[-1, :]))),
        float(np.max(np.abs(psi[:, 0]))),
        float(np.max(np.abs(psi[:, -1]))),
    )
    if edge > 1e-8 * peak:
        raise ValueError(
            f"boundary leakage: |psi|_edge/|psi|_peak = {edge/peak:.2e} > 1e-8; "
            "enlarge the domain"
        )
    psi[0, :] = psi[-1, :] = 0.0
    psi[:, 0] = psi[:, -1] = 0.0
    psi = 0.5 * (psi + psi.T)  # exact exchange symmetry, not just to rounding
    psi = psi / math.sqrt(float(np.sum(np.abs(psi) ** 2)) * cfg.h**2)
    return GridState(psi=psi.astype(complex), t=0.0)


class _AxisCayley:
    """Cayley transform of H_axis = -d^2/dx^2 + V/2 along axis 0.

    Precomputes the Thomas elimination of (1 + i th H / 2) for every
    column at once; ``apply`` multiplies by (1 - i th H / 2) with the
    stencil and back-substitutes.  Interior points only (Dirichlet).
    """

    def __init__(self, v_half: np.ndarray, h: float, theta: float):
        m = v_half.shape[0]
        z = 0.5j * theta
        self.off = -z / h**2  # constant off-diagonal of (1 + z H)
        self.off_b = +1j * 0.5 * theta / h**2  # off-diagonal of (1 - z H)
        diag = 1.0 + z * (2.0 / h**2 + v_half)
        self.diag_b = 1.0 - z * (2.0 / h**2 + v_half)
        inv_denom = np.empty_like(diag)
        cp = np.empty_like(diag)
        inv_denom[0] = 1.0 / diag[0]
        cp[0] = self.off * inv_denom[0]
        for i in range(1, m):
            inv_denom[i] = 1.0 / (diag[i] - self.off * cp[i - 1])
            cp[i] = self.off * inv_denom[i]
        self.inv_denom = inv_denom
        self.cp = cp
        self.m = m

    def apply(self, psi: np.ndarray) -> np.ndarray:
        # rhs = (1 - z H) psi, 3-point stencil along axis 0
        rhs = self.diag_b * psi
        rhs[1:] += self.off_b * psi[:-1]
        rhs[:-1] += self.off_b * psi[1:]
        out = np.empty_like(rhs)
        out[0] = rhs[0] * self.inv_denom[0]
        for i in range(1, self.m):
            out[i] = (rhs[i] - self.off * out[i - 1]) * self.inv_denom[i]
        for i in range(self.m - 2, -1, -1):
            out[i] -= self.cp[i] * out[i + 1]
        return out


class _Stepper:
    def __init__(self, cfg: LatticeConfig):
        self.cfg = cfg
        v_half = 0.5 * _potential(cfg)[1:-1, 1:-1]
        self.half = _AxisCayley(v_half, cfg.h, 0.5 * cfg.dt)
        self.full = _AxisCayley(v_half, cfg.h, cfg.dt)

    def advance(self, psi: np.ndarray):
        """One split-Cayley step on the full grid; returns (psi', asym).

        ``asym`` is the pre-projection exchange asymmetry introduced by
        the step (pure splitting error for symmetric data).
        """
        inner = psi[1:-1, 1:-1]
        # C_2(dt/2): axis-1 update == axis-0 update of the transpose
        inner = self.half.apply(inner.T).T
        inner = self.full.apply(inner)
        inner = self.half.apply(inner.T).T
        scale = float(np.max(np.abs(inner)))
        asym = 0.0
        if scale > 0.0:
            asym = float(np.max(np.abs(inner - inner.T))) / scale
        inner = 0.5 * (inner + inner.T)
        out = np.zeros_like(psi)
        out[1:-1, 1:-1] = inner
        return out, asym


def step(cfg: LatticeConfig, state: GridState, stepper: _Stepper | None = None) -> GridState:
    """Advance one dt; norm drift per step is at roundoff level."""
    if stepper is None:
        stepper = _Stepper(cfg)
    psi, _ = stepper.advance(state.psi)
    if not np.all(np.isfinite(psi)):
        raise FloatingPointError("lattice step produced non-finite values")
    return GridState(psi=psi, t=state.t + cfg.dt)


def evolve_lattice(cfg: LatticeConfig, state: GridState, t_final: float):
    """March to t_final (must be an integer number of steps away).

    Returns (state, telemetry) where telemetry records the worst
    per-step norm drift, pre-projection asymmetry, and boundary-adjacent
    amplitude seen along the way.
    """
    n_steps_f = (t_final - state.t) / cfg.dt
    n_steps = int(round(n_steps_f))
    if n_steps < 0 or abs(n_steps_f - n_steps) > 1e-6 * max(1, abs(n_steps)):
        raise ValueError(
            f"t_final - t = {t_final - state.t:g} is not a multiple of dt = {cfg.dt:g}"
        )
    stepper = _Stepper(cfg)
    h = cfg.h
    psi = state.psi
    t = state.t
    norm_prev = float(np.sum(np.abs(psi) ** 2)) * h * h
    tele = {"max_step_drift": 0.0, "max_asym": 0.0, "max_edge": 0.0, "steps": n_steps}
    for _ in range(n_steps):
        psi, asym = stepper.advance(psi)
        t += cfg.dt
        norm_now = float(np.sum(np.abs(psi) ** 2)) * h * h
        tele["max_step_drift"] = max(tele["max_step_drift"], abs(norm_now - norm_prev))
        tele["max_asym"] = max(tele["max_asym"], asym)
        edge = max(
            float(np.max(np.abs(psi[1, :]))), float(np.max(np.abs(psi[-2, :])))
        )
        tele["max_edge"] = max(tele["max_edge"], edge)
        norm_prev = norm_now
    if not np.all(np.isfinite(psi)):
        raise FloatingPointError("lattice evolution produced non-finite values")
    tele["final_norm"] = norm_prev
    return GridState(psi=psi, t=t), tele


def free_reference_field(cfg: LatticeConfig, state: InitialState, t: float) -> np.ndarray:
    """Symmetrized product of exactly evolved free packets on the grid."""
    ax = cfg.axis
    f1 = free_packet_evolved(ax, t, state.packets[0])
    f2 = free_packet_evolved(ax, t, state.packets[1])
    return np.outer(f1, f2) + np.outer(f2, f1)


def _ordered_weights(n: int, h: float) -> np.ndarray:
    w = np.full(n, h)
    w[0] *= 0.5
    w[-1] *= 0.5
    ww = np.outer(w, w)
    i, j = np.indices((n, n))
    ww *= i <= j
    ww /= 1.0 + (i == j)
    return ww


def compare_fields(cfg: LatticeConfig, psi_lat: np.ndarray, reference: np.ndarray) -> float:
    """Relative L2 difference over the ordered sector x1 <= x2.

    The lattice state is unit-normalized on the plane while reference
    fields follow the ordered-sector convention, so the reference is
    rescaled by the (real, positive) ratio of ordered-sector norms
    before differencing; dynamics and phases are not adjusted.
    """
    ww = _ordered_weights(cfg.n_x, cfg.h)
    norm_lat = math.sqrt(float(np.sum(ww * np.abs(psi_lat) ** 2)))
    norm_ref = math.sqrt(float(np.sum(ww * np.abs(reference) ** 2)))
    if norm_ref == 0.0:
        raise ValueError("reference field has zero ordered-sector norm")
    scaled = reference * (norm_lat / norm_ref)
    diff = math.sqrt(float(np.sum(ww * np.abs(psi_lat - scaled) ** 2)))
    return diff / norm_lat


def compare_to_bethe(cfg: LatticeConfig, state_lat: GridState, bethe: EvolvedState) -> float:
    """Relative L2 difference between lattice and Bethe fields.

    The Bethe state must be a grid state sampled on the lattice axis at
    the same physical time and parameters.
    """
    if bethe.kind != "grid" or bethe.values.ndim != 2:
        raise ValueError("need an N = 2 grid EvolvedState")
    if bethe.axis.shape != cfg.axis.shape or not np.allclose(bethe.axis, cfg.axis):
        raise ValueError("Bethe state must be sampled on the lattice axis")
    if abs(bethe.t - state_lat.t) > 1e-9:
        raise ValueError(f"time mismatch: lattice {state_lat.t}, Bethe {bethe.t}")
    return compare_fields(cfg, state_lat.psi, bethe.values)


def diagonal_cusp_ratio(cfg: LatticeConfig, state: GridState, offset: int = 4) -> float:
    """Measured (d_2 - d_1)psi / (c psi) proxy on the coincidence line.

    One-sided stencil along the hyperplane normal at anti-diagonal
    offsets (0, offset, 2*offset) cells; averaged over diagonal points
    weighted by |psi|^2.  Approaches c from below as the mollifier
    narrows (the stencil must sit outside the smoothed core).
    """
    psi = state.psi
    n = cfg.n_x
    h = cfg.h
    o = offset
    idx = np.arange(2 * o + 1, n - 2 * o - 1)
    phi0 = psi[idx, idx]
    phi1 = psi[idx - o, idx + o]
    phi2 = psi[idx - 2 * o, idx + 2 * o]
    s1 = o * h
    deriv = (-3.0 * phi0 + 4.0 * phi1 - phi2) / (2.0 * s1)
    weight = np.abs(phi0) ** 2
    strong = weight > 0.04 * float(np.max(weight))
    ratio = np.real(deriv[strong] / phi0[strong])
    return float(np.average(ratio, weights=weight[strong]))
