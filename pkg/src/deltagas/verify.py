"""Orchestrated verification suite.

Each check runs one acceptance-grade property of the construction at
its pinned tolerance and reports the measured numbers; the CLI `verify`
command and the acceptance test module both drive this registry, so
there is a single source of truth for what "correct" means.

Checks never mask each other: a crash inside one is recorded as its
failure and the sweep continues.  All randomness flows from the single
seed.  ``tolerance_scale`` multiplies every pass threshold (windows get
their upper edges scaled), so scale = 0 forces failures -- used to test
that failures propagate.
"""

from __future__ import annotations

import math
import time
import warnings
from dataclasses import dataclass, field

import numpy as np

__all__ = ["CheckResult", "CHECKS", "run_checks", "ALL_CHECK_NAMES"]


@dataclass
class CheckResult:
    name: str
    passed: bool
    measured: dict = field(default_factory=dict)
    tolerance: dict = field(default_factory=dict)
    runtime_s: float = 0.0
    detail: str = ""
    error: str | None = None

    def to_dict(self) -> dict:
        return {
            "name": self.name,
            "passed": bool(self.passed),
            "measured": {k: _jsonable(v) for k, v in self.measured.items()},
            "tolerance": {k: _jsonable(v) for k, v in self.tolerance.items()},
            "runtime_s": round(self.runtime_s, 3),
            "detail": self.detail,
            "error": self.error,
        }


def _jsonable(v):
    if isinstance(v, (np.floating, np.integer)):
        return v.item()
    if isinstance(v, (list, tuple)):
        return [_jsonable(x) for x in v]
    return v


CHECKS = {}


def _register(name):
    def deco(fn):
        CHECKS[name] = fn
        return fn

    return deco


# ---------------------------------------------------------------------------
# 1. amplitude recursion
# ---------------------------------------------------------------------------


@_register("amplitude_recursion")
def _check_recursion(rng: np.random.Generator, scale: float) -> CheckResult:
    """A_{T_i sigma} = S_{sigma(i+1) sigma(i)} A_sigma, exhaustive over S_4."""
    from .bethe import (
        ScatteringContext,
        all_permutations,
        amplitude,
        recursion_residual,
    )

    tol = 1e-12 * scale
    worst = 0.0
    ctx = ScatteringContext(1.3)
    perms = all_permutations(4)
    ks = rng.uniform(-4.0, 4.0, size=(100, 4))
    for k in ks:
        for sigma in perms:
            a_mag = max(1.0, abs(amplitude(sigma, k, ctx)))
            for i in range(1, 4):
                worst = max(worst, recursion_residual(sigma, i, k, ctx) / a_mag)
    return CheckResult(
        name="amplitude_recursion",
        passed=worst <= tol,
        measured={"max_relative_residual": worst},
        tolerance={"max_relative_residual": tol},
        detail="exhaustive S4 x adjacent slots x 100 momentum draws",
    )


# ---------------------------------------------------------------------------
# 2. S-matrix algebra
# ---------------------------------------------------------------------------


@_register("smatrix_algebra")
def _check_smatrix(rng: np.random.Generator, scale: float) -> CheckResult:
    """Unit modulus and S(k) S(-k) = 1 over 10^4 real momenta."""
    from .bethe import ScatteringContext, s_factor

    tol = 1e-14 * scale
    k = rng.uniform(-50.0, 50.0, size=10_000)
    c = float(rng.uniform(0.1, 10.0))
    ctx = ScatteringContext(c)
    s = s_factor(k, ctx)
    uni = float(np.max(np.abs(np.abs(s) - 1.0)))
    inv = float(np.max(np.abs(s * s_factor(-k, ctx) - 1.0)))
    return CheckResult(
        name="smatrix_algebra",
        passed=uni <= tol and inv <= tol,
        measured={"max_unitarity_defect": uni, "max_inverse_pair_defect": inv},
        tolerance={"max_unitarity_defect": tol, "max_inverse_pair_defect": tol},
        detail=f"c = {c:.3f}",
    )


# ---------------------------------------------------------------------------
# 3. N=2 dual-path equivalence
# ---------------------------------------------------------------------------


@_register("n2_dual_path")
def _check_dual_path(rng: np.random.Generator, scale: float) -> CheckResult:
    """Full 2-D quadrature against the center-of-mass/relative reduction."""
    from .propagator import PropagatorQuery, green_function, n2_semianalytic

    tol = 1e-6 * scale
    worst = 0.0
    for _ in range(25):
        c = float(rng.uniform(0.2, 5.0))
        t = float(rng.uniform(0.05, 1.0))
        eta = float(rng.uniform(0.02, 0.2))
        y = np.sort(rng.uniform(-1.0, 1.0, size=2))
        while y[1] - y[0] < 0.25:
            y = np.sort(rng.uniform(-1.0, 1.0, size=2))
        x = np.sort(rng.uniform(-1.2, 1.2, size=2))
        q = PropagatorQuery(x=x, y=y, t=t, eta=eta, c=c)
        full = green_function(q, eps=1e-12, n_k_ceiling=262_144).value
        semi = n2_semianalytic(q, eps=1e-12)
        worst = max(worst, abs(full - semi) / abs(semi))
    return CheckResult(
        name="n2_dual_path",
        passed=worst <= tol,
        measured={"max_relative_error": worst},
        tolerance={"max_relative_error": tol},
        detail="25 random (c, t, eta, x, y) parameter sets",
    )


# ---------------------------------------------------------------------------
# 4. free limit
# ---------------------------------------------------------------------------


@_register("free_limit")
def _check_free_limit(rng: np.random.Generator, scale: float) -> CheckResult:
    """c -> 0: the propagator becomes the permanent of free kernels.

    The scattering factor at exactly coincident grid momenta is -1 for
    every positive coupling, so a uniform tensor grid carries an O(dk)
    coupling-independent artifact on its diagonal; the check therefore
    runs on a deliberately fine grid (cheap via the Toeplitz/FFT route).
    """
    from .propagator import PropagatorQuery, free_boson_green, green_function
    from .quadrature import uniform_grid

    tol = 1e-4 * scale
    q = PropagatorQuery(x=[-0.4, 0.4], y=[-0.5, 0.3], t=0.1, eta=1.0, c=1e-6)
    k_max = math.sqrt(math.log(1e12) / q.eta)
    grid = uniform_grid(k_max, 98_305)
    val = green_function(q, grid=grid).value
    ref = free_boson_green(q)
    err = abs(val - ref) / abs(ref)
    return CheckResult(
        name="free_limit",
        passed=err <= tol,
        measured={"relative_error": err},
        tolerance={"relative_error": tol},
        detail=f"c = 1e-6, n_k = {grid.n_k}",
    )


# ---------------------------------------------------------------------------
# 5. Tonks limit
# ---------------------------------------------------------------------------


@_register("tonks_limit")
def _check_tonks_limit(rng: np.random.Generator, scale: float) -> CheckResult:
    """c -> infinity errors shrink like 1/c: successive ratios in [6, 14]."""
    lo, hi = 6.0, 14.0 * scale
    from .propagator import PropagatorQuery, green_function, tonks_green

    errs = []
    for c in (10.0, 100.0, 1000.0):
        q = PropagatorQuery(x=[-0.3, 0.5], y=[-0.5, 0.4], t=0.1, eta=0.5, c=c)
        val = green_function(q, eps=1e-12, n_k_ceiling=32_768).value
        ref = tonks_green(q)
        errs.append(abs(val - ref) / abs(ref))
    ratios = [errs[i] / errs[i + 1] for i in range(2)]
    ok = all(lo <= r <= hi for r in ratios) and errs[0] > errs[1] > errs[2]
    return CheckResult(
        name="tonks_limit",
        passed=ok,
        measured={"errors": errs, "ratios": ratios},
        tolerance={"ratio_window": [lo, hi]},
        detail="c in {10, 100, 1000}",
    )


# ---------------------------------------------------------------------------
# 6. cusp condition
# ---------------------------------------------------------------------------


@_register("cusp_condition")
def _check_cusp(rng: np.random.Generator, scale: float) -> CheckResult:
    """Contact condition residual at h = 1e-3, plus O(h^2) refinement."""
    from .propagator import PropagatorQuery, cusp_residual

    tol = 1e-3 * scale
    worst2 = 0.0
    for _ in range(10):
        x0 = float(rng.uniform(-0.3, 1.2))
        q = PropagatorQuery(x=[x0, x0], y=[0.0, 1.0], t=0.2, eta=0.05, c=1.0)
        worst2 = max(worst2, cusp_residual(q, h=1e-3))
    worst3 = 0.0
    for i in range(10):
        x0 = float(rng.uniform(-0.5, 0.8))
        spectator = x0 - 1.2 if i % 2 == 0 else x0 + 1.2
        xs = sorted([x0, x0, spectator])
        q = PropagatorQuery(
            x=xs, y=[-0.9, 0.1, 0.9], t=0.15, eta=0.08, c=1.0
        )
        worst3 = max(worst3, cusp_residual(q, h=1e-3))
    ratios = []
    for x0 in (0.2, 0.6, 1.0):
        q = PropagatorQuery(x=[x0, x0], y=[0.0, 1.0], t=0.2, eta=0.05, c=1.0)
        ratios.append(cusp_residual(q, h=8e-3) / cusp_residual(q, h=4e-3))
    trend_ok = all(2.5 <= r <= 6.0 * max(scale, 1e-300) for r in ratios)
    ok = worst2 <= tol and worst3 <= tol and trend_ok
    return CheckResult(
        name="cusp_condition",
        passed=ok,
        measured={
            "max_residual_n2": worst2,
            "max_residual_n3": worst3,
            "refinement_ratios": ratios,
        },
        tolerance={"max_residual": tol, "ratio_window": [2.5, 6.0]},
        detail="10 diagonal points each for N = 2 and N = 3, h = 1e-3",
    )


# ---------------------------------------------------------------------------
# 7. PDE residual
# ---------------------------------------------------------------------------


@_register("pde_residual")
def _check_pde(rng: np.random.Generator, scale: float) -> CheckResult:
    """Free equation of motion in the open ordered sector."""
    from .propagator import PropagatorQuery, pde_residual

    tol = 1e-3 * scale
    worst = 0.0
    for _ in range(6):
        x = np.sort(rng.uniform(-1.0, 1.0, size=2))
        while x[1] - x[0] < 0.3:
            x = np.sort(rng.uniform(-1.0, 1.0, size=2))
        q = PropagatorQuery(x=x, y=[-0.3, 0.8], t=0.3, eta=0.05, c=1.0)
        worst = max(worst, pde_residual(q, h_x=1e-3, h_t=1e-3))
    return CheckResult(
        name="pde_residual",
        passed=worst <= tol,
        measured={"max_residual": worst},
        tolerance={"max_residual": tol},
        detail="6 interior points, N = 2, h = 1e-3",
    )


# ---------------------------------------------------------------------------
# 8. initial condition
# ---------------------------------------------------------------------------


@_register("initial_condition")
def _check_initial_condition(rng: np.random.Generator, scale: float) -> CheckResult:
    """t = 0 recovery of the free state and the weak-form delta trend."""
    from .packets import GaussianPacketSpec, InitialState, symmetrized_state_value
    from .evolution import evolve_spectral_grid
    from .propagator import PropagatorQuery, green_function_field

    sup_tol = 1e-3 * scale
    ratio_window = (1.4, 2.8 * max(scale, 1e-300))

    state = InitialState(
        (GaussianPacketSpec(0.25, 0.0), GaussianPacketSpec(0.25, 4.0))
    )
    axis = np.linspace(-2.5, 6.5, 181)
    ev = evolve_spectral_grid(axis, state, t=0.0, c=1.0, eps=1e-10)
    x1, x2 = np.meshgrid(axis, axis, indexing="ij")
    pts = np.stack([x1, x2], axis=-1)
    free = symmetrized_state_value(pts, state)
    mask = x1 <= x2
    peak = float(np.max(np.abs(free)))
    sup_err = float(np.max(np.abs(ev.values - free)[mask])) / peak

    # weak form: ordered-sector integral of G(x, y; 0, eta) f(x) -> f(y)
    y = np.array([-1.5, 1.5])
    f_center = y
    axis_w = np.linspace(-6.0, 6.0, 161)
    xw1, xw2 = np.meshgrid(axis_w, axis_w, indexing="ij")
    f_vals = np.exp(-((xw1 - f_center[0]) ** 2 + (xw2 - f_center[1]) ** 2) / 2.0)
    w = np.full(axis_w.size, axis_w[1] - axis_w[0])
    w[0] *= 0.5
    w[-1] *= 0.5
    ww = np.outer(w, w)
    i, j = np.indices(f_vals.shape)
    ww = ww * (i <= j) / (1.0 + (i == j))
    errors = []
    for eta in (0.1, 0.05, 0.025):
        q = PropagatorQuery(x=y, y=y, t=0.0, eta=eta, c=1.0)
        field, _ = green_function_field(q, [axis_w, axis_w], eps=1e-12)
        weak = complex(np.sum(ww * f_vals * field))
        errors.append(abs(weak - 1.0))
    ratios = [errors[0] / errors[1], errors[1] / errors[2]]
    trend_ok = all(ratio_window[0] <= r <= ratio_window[1] for r in ratios)
    ok = sup_err <= sup_tol and trend_ok and errors[-1] < 0.1
    return CheckResult(
        name="initial_condition",
        passed=ok,
        measured={
            "sup_error_over_peak": sup_err,
            "weak_form_errors": errors,
            "weak_form_ratios": ratios,
        },
        tolerance={"sup_error_over_peak": sup_tol, "ratio_window": list(ratio_window)},
        detail="gap/width = 16 recovery; eta in {0.1, 0.05, 0.025} smoothing trend",
    )


# ---------------------------------------------------------------------------
# 9. norm conservation
# ---------------------------------------------------------------------------

REFERENCE_PACKETS = ((0.25, -1.5, 1.0), (0.25, 1.5, -1.0))


def _reference_state():
    from .packets import GaussianPacketSpec, InitialState

    return InitialState(tuple(GaussianPacketSpec(*p) for p in REFERENCE_PACKETS))


@_register("norm_conservation")
def _check_norm(rng: np.random.Generator, scale: float) -> CheckResult:
    """Ordered-sector norm constant under evolution (contact flux vanishes)."""
    from .evolution import evolve_spectral_grid, norm_squared

    tol = 1e-3 * scale
    state = _reference_state()
    # +-20 covers the ballistic momentum tails (sigma_k = 2) through t = 1
    axis = np.linspace(-20.0, 20.0, 801)
    norms = []
    for t in (0.0, 0.25, 0.5, 1.0):
        ev = evolve_spectral_grid(axis, state, t=t, c=1.0, eps=1e-10)
        norms.append(norm_squared(ev))
    drift = max(abs(n - norms[0]) for n in norms[1:])
    return CheckResult(
        name="norm_conservation",
        passed=drift <= tol,
        measured={"norms": norms, "max_drift": drift},
        tolerance={"max_drift": tol},
        detail="reference packet collision, t in {0, 0.25, 0.5, 1}",
    )


# ---------------------------------------------------------------------------
# 10. lattice oracle
# ---------------------------------------------------------------------------


@_register("lattice_oracle")
def _check_lattice(rng: np.random.Generator, scale: float) -> CheckResult:
    """Mollified Crank-Nicolson lattice against the Bethe evaluator."""
    from .packets import GaussianPacketSpec, InitialState
    from .evolution import evolve_spectral_grid
    from .lattice import (
        LatticeConfig,
        compare_fields,
        compare_to_bethe,
        evolve_lattice,
        free_reference_field,
        init_from_packets,
    )

    ref_tol = 5e-2 * scale
    free_tol = 1e-3 * scale

    h = 16.0 / 512.0
    state = _reference_state()
    axis = np.linspace(-8.0, 8.0, 513)
    bethe = evolve_spectral_grid(axis, state, t=0.5, c=1.0, eps=1e-10)

    diffs = {}
    for mult in (8, 4, 2):
        cfg = LatticeConfig(L=8.0, n_x=513, dt=h * h, w=mult * h, c=1.0)
        g0 = init_from_packets(cfg, state)
        g1, _ = evolve_lattice(cfg, g0, 0.5)
        diffs[mult] = compare_to_bethe(cfg, g1, bethe)
    decreasing = diffs[8] > diffs[4] > diffs[2]

    h2 = 16.0 / 768.0
    cfg0 = LatticeConfig(L=8.0, n_x=769, dt=h2 * h2, w=4 * h2, c=0.0)
    state0 = InitialState(
        (GaussianPacketSpec(0.5, -2.0, 0.5), GaussianPacketSpec(0.5, 2.0, -0.5))
    )
    g0 = init_from_packets(cfg0, state0)
    g1, _ = evolve_lattice(cfg0, g0, 0.5)
    free_diff = compare_fields(cfg0, g1.psi, free_reference_field(cfg0, state0, 0.5))

    ok = diffs[4] <= ref_tol and free_diff <= free_tol and decreasing
    return CheckResult(
        name="lattice_oracle",
        passed=ok,
        measured={
            "reference_difference": diffs[4],
            "free_control_difference": free_diff,
            "mollifier_sweep": [diffs[8], diffs[4], diffs[2]],
        },
        tolerance={
            "reference_difference": ref_tol,
            "free_control_difference": free_tol,
            "mollifier_sweep": "strictly decreasing",
        },
        detail="reference scenario at w = 4h; w in {8h, 4h, 2h} refinement",
    )


# ---------------------------------------------------------------------------
# 11. determinism
# ---------------------------------------------------------------------------


@_register("determinism")
def _check_determinism(rng: np.random.Generator, scale: float) -> CheckResult:
    """Repeated propagator runs with one config emit byte-identical CSVs."""
    import hashlib
    import json
    import tempfile
    from pathlib import Path

    from .cli import main as cli_main

    config = {
        "n": 2,
        "c": 1.0,
        "t": 0.25,
        "eta": 0.1,
        "y": [-0.5, 0.5],
        "xgrid": {"min": -2.0, "max": 2.0, "points": 41},
        "grid": {"eps": 1e-10},
    }
    digests = []
    with tempfile.TemporaryDirectory() as td:
        cfg_path = Path(td) / "cfg.json"
        cfg_path.write_text(json.dumps(config))
        for run in range(2):
            out = Path(td) / f"run{run}"
            rc = cli_main(
                ["propagator", "--config", str(cfg_path), "--out", str(out)]
            )
            if rc != 0:
                return CheckResult(
                    name="determinism",
                    passed=False,
                    error=f"propagator run exited {rc}",
                )
            csv = out / "propagator.csv"
            digests.append(hashlib.sha256(csv.read_bytes()).hexdigest())
    identical = digests[0] == digests[1] and scale >= 1.0
    return CheckResult(
        name="determinism",
        passed=identical,
        measured={"sha256": digests},
        tolerance={"requirement": "byte-identical CSV"},
        detail="two full CLI runs of the same config",
    )


ALL_CHECK_NAMES = list(CHECKS)


def run_checks(names=None, seed: int = 0, tolerance_scale: float = 1.0) -> dict:
    """Run the named checks (all by default); failures never mask later ones."""
    if names is None or names == "all" or names == ["all"]:
        names = ALL_CHECK_NAMES
    unknown = [n for n in names if n not in CHECKS]
    if unknown:
        raise ValueError(f"unknown checks: {unknown}; available: {ALL_CHECK_NAMES}")
    results = []
    for name in names:
        rng = np.random.default_rng(np.random.SeedSequence([seed, _check_index(name)]))
        start = time.perf_counter()
        try:
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", RuntimeWarning)
                res = CHECKS[name](rng, tolerance_scale)
        except Exception as exc:  # noqa: BLE001 - recorded, not masked
            res = CheckResult(name=name, passed=False, error=f"{type(exc).__name__}: {exc}")
        res.runtime_s = time.perf_counter() - start
        results.append(res)
    return {
        "seed": seed,
        "tolerance_scale": tolerance_scale,
        "all_passed": all(r.passed for r in results),
        "checks": [r.to_dict() for r in results],
    }


def _check_index(name: str) -> int:
    return ALL_CHECK_NAMES.index(name)
