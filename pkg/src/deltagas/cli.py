"""Command-line surface.

    deltagas propagator --config cfg.json [--out DIR]
    deltagas evolve     --config cfg.json [--out DIR]
    deltagas tonks      --config cfg.json [--out DIR]
    deltagas oracle-n2  --config cfg.json [--out DIR]
    deltagas verify     [--config cfg.json] [--out DIR] [--seed N]

Configs are JSON, schema-validated before any computation; unknown keys
are rejected.  Data files are CSV, metadata is a JSON manifest listing
every emitted file with its sha256 (rerunning an identical config and
version reproduces identical data checksums).  Files are written to a
temporary name and renamed, and nothing is written until the whole
computation has finished, so error exits leave no partial output.

Exit codes: 0 success, 1 verification failure, 2 config error,
3 infeasible grid, 4 numerical abort.

``--threads N`` (or the DELTAGAS_THREADS environment variable, the only
environment override honored) pins the BLAS thread pools; it must be
processed before numpy loads, which is why the numeric imports live
inside the command handlers.
"""

from __future__ import annotations

import argparse
import hashlib
import json
import os
import sys
import time

__all__ = ["main", "ConfigError"]

EXIT_OK = 0
EXIT_VERIFY_FAILED = 1
EXIT_CONFIG = 2
EXIT_INFEASIBLE = 3
EXIT_NUMERICAL = 4


class ConfigError(ValueError):
    pass


# ---------------------------------------------------------------------------
# config schema helpers
# ---------------------------------------------------------------------------


def _expect(cfg: dict, path: str, schema: dict) -> dict:
    """Validate ``cfg`` against {key: (types, required, default)}; reject unknowns."""
    if not isinstance(cfg, dict):
        raise ConfigError(f"{path}: expected an object")
    unknown = set(cfg) - set(schema)
    if unknown:
        raise ConfigError(f"{path}: unknown keys {sorted(unknown)}")
    out = {}
    for key, (types, required, default) in schema.items():
        if key not in cfg:
            if required:
                raise ConfigError(f"{path}: missing required key '{key}'")
            out[key] = default
            continue
        val = cfg[key]
        if types is float:
            if not isinstance(val, (int, float)) or isinstance(val, bool):
                raise ConfigError(f"{path}.{key}: expected a number")
            val = float(val)
        elif types is int:
            if not isinstance(val, int) or isinstance(val, bool):
                raise ConfigError(f"{path}.{key}: expected an integer")
        elif types is list:
            if not isinstance(val, list):
                raise ConfigError(f"{path}.{key}: expected a list")
        elif types is dict:
            if not isinstance(val, dict):
                raise ConfigError(f"{path}.{key}: expected an object")
        elif types is str:
            if not isinstance(val, str):
                raise ConfigError(f"{path}.{key}: expected a string")
        out[key] = val
    return out


_GRID_SCHEMA = {
    "eps": (float, False, 1e-10),
    "k_max": (float, False, None),
    "n_k": (int, False, None),
    "ceiling": (int, False, 4096),
}

_XGRID_SCHEMA = {
    "min": (float, True, None),
    "max": (float, True, None),
    "points": (int, True, None),
}


def _parse_xgrid(raw: dict, path: str, n: int):
    import numpy as np

    xg = _expect(raw, path, _XGRID_SCHEMA)
    if xg["max"] <= xg["min"]:
        raise ConfigError(f"{path}: max must exceed min")
    if xg["points"] < 2:
        raise ConfigError(f"{path}: need at least 2 points")
    if xg["points"] ** n > 300_000:
        raise ConfigError(f"{path}: {xg['points']}^{n} rows is over the 3e5 cap")
    return np.linspace(xg["min"], xg["max"], xg["points"])


def _resolve_grid(raw: dict, path: str, budget):
    """Explicit (kmax, nk) wins; otherwise build from the damping budget."""
    from dataclasses import replace

    from .quadrature import build_grid, uniform_grid

    g = _expect(raw, path, _GRID_SCHEMA)
    if (g["k_max"] is None) != (g["n_k"] is None):
        raise ConfigError(f"{path}: k_max and n_k must be given together")
    if g["k_max"] is not None:
        return uniform_grid(g["k_max"], g["n_k"]), g
    budget = replace(budget, eps_quad=g["eps"], n_k_ceiling=g["ceiling"])
    return build_grid(budget), g


def _parse_packets(raw: list, path: str):
    from .packets import GaussianPacketSpec, InitialState

    if not raw:
        raise ConfigError(f"{path}: need at least one packet")
    packets = []
    for i, item in enumerate(raw):
        p = _expect(
            item,
            f"{path}[{i}]",
            {"a": (float, True, None), "y0": (float, True, None), "p": (float, False, 0.0)},
        )
        packets.append(GaussianPacketSpec(a=p["a"], y0=p["y0"], p=p["p"]))
    try:
        return InitialState(tuple(packets))
    except ValueError as exc:
        raise ConfigError(f"{path}: {exc}") from exc


# ---------------------------------------------------------------------------
# output helpers
# ---------------------------------------------------------------------------


def _atomic_write(path, data: bytes) -> None:
    tmp = path.with_name(f".{path.name}.tmp-{os.getpid()}")
    tmp.write_bytes(data)
    os.replace(tmp, path)


def _csv_bytes(header: list[str], rows) -> bytes:
    lines = [",".join(header)]
    for row in rows:
        lines.append(",".join(repr(float(v)) for v in row))
    return ("\n".join(lines) + "\n").encode()


def _sha256(data: bytes) -> str:
    return hashlib.sha256(data).hexdigest()


def _emit(out_dir, files: dict[str, bytes], manifest: dict) -> None:
    """Write data files then the manifest; nothing touches disk on failure."""
    from pathlib import Path

    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    manifest["outputs"] = [
        {"file": name, "sha256": _sha256(data), "bytes": len(data)}
        for name, data in files.items()
    ]
    for name, data in files.items():
        _atomic_write(out / name, data)
    _atomic_write(
        out / "manifest.json",
        json.dumps(manifest, indent=2, sort_keys=True).encode() + b"\n",
    )


def _manifest_base(command: str, config: dict) -> dict:
    from . import __version__

    return {
        "command": command,
        "version": __version__,
        "config": config,
        "wall_clock_s": None,  # filled just before writing
    }


def _field_rows(axes, field):
    """Tensor grid rows (x1..xN, Re, Im, |psi|^2), last axis fastest."""
    import numpy as np

    mesh = np.meshgrid(*axes, indexing="ij")
    flat = [m.ravel() for m in mesh]
    vals = field.ravel()
    return np.column_stack([*flat, vals.real, vals.imag, np.abs(vals) ** 2])


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------

_PROP_SCHEMA = {
    "n": (int, True, None),
    "c": (float, True, None),
    "t": (float, True, None),
    "eta": (float, True, None),
    "y": (list, True, None),
    "xgrid": (dict, True, None),
    "grid": (dict, False, {}),
}


def cmd_propagator(config: dict, out_dir) -> int:
    import numpy as np

    from .propagator import (
        PropagatorQuery,
        green_function,
        green_function_field,
        symmetrize_field,
    )

    cfg = _expect(config, "config", _PROP_SCHEMA)
    n = cfg["n"]
    if not 1 <= n <= 3:
        raise ConfigError("config.n: grid evaluation supports 1 <= n <= 3")
    if len(cfg["y"]) != n:
        raise ConfigError(f"config.y: expected {n} sources")
    axis = _parse_xgrid(cfg["xgrid"], "config.xgrid", n)
    try:
        q = PropagatorQuery(
            x=np.zeros(n), y=cfg["y"], t=cfg["t"], eta=cfg["eta"], c=cfg["c"]
        )
        if q.eta <= 0.0:
            raise ConfigError("config.eta: quadrature evaluation needs eta > 0")
        span = float(np.max(np.abs(axis[:, None] - q.y[None, :])))
        from .quadrature import DampingBudget

        budget = DampingBudget(eta_eff=q.eta, L_max=span, t_scale=q.t)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    start = time.perf_counter()
    grid, grid_cfg = _resolve_grid(cfg["grid"], "config.grid", budget)
    field, grid = green_function_field(q, [axis] * n, grid=grid)
    field = symmetrize_field(field)
    center = PropagatorQuery(
        x=np.full(n, float(axis[axis.size // 2])) + np.arange(n) * 1e-6,
        y=q.y,
        t=q.t,
        eta=q.eta,
        c=q.c,
    )
    ledger = green_function(center, grid=grid)

    header = [f"x{i+1}" for i in range(n)] + ["re_psi", "im_psi", "abs2_psi"]
    rows = _field_rows([axis] * n, field)
    manifest = _manifest_base("propagator", config)
    manifest["grid"] = grid.echo()
    manifest["green_value_at_center"] = {
        "query": {"x": list(center.x), "y": list(center.y), "t": center.t,
                  "eta": center.eta, "c": center.c},
        "value": [ledger.value.real, ledger.value.imag],
        "term_magnitudes": list(ledger.term_magnitudes),
        "grid": ledger.grid.echo(),
    }
    manifest["wall_clock_s"] = round(time.perf_counter() - start, 3)
    _emit(out_dir, {"propagator.csv": _csv_bytes(header, rows)}, manifest)
    return EXIT_OK


_TONKS_SCHEMA = {
    "n": (int, True, None),
    "t": (float, True, None),
    "eta": (float, True, None),
    "y": (list, True, None),
    "xgrid": (dict, True, None),
}


def cmd_tonks(config: dict, out_dir) -> int:
    import numpy as np

    from .propagator import PropagatorQuery, free_kernel

    cfg = _expect(config, "config", _TONKS_SCHEMA)
    n = cfg["n"]
    if not 1 <= n <= 3:
        raise ConfigError("config.n: grid evaluation supports 1 <= n <= 3")
    if len(cfg["y"]) != n:
        raise ConfigError(f"config.y: expected {n} sources")
    if cfg["t"] == 0.0 and cfg["eta"] == 0.0:
        raise ConfigError("config: tau = t - i eta must be nonzero")
    axis = _parse_xgrid(cfg["xgrid"], "config.xgrid", n)
    try:
        q = PropagatorQuery(
            x=np.zeros(n), y=cfg["y"], t=cfg["t"], eta=cfg["eta"], c=1.0
        )
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    start = time.perf_counter()
    tau = q.tau
    # determinant of one-particle kernels, vectorized over the grid
    mesh = np.meshgrid(*([axis] * n), indexing="ij")
    mats = np.empty(mesh[0].shape + (n, n), dtype=complex)
    for a in range(n):
        for b in range(n):
            mats[..., a, b] = free_kernel(mesh[b] - q.y[a], tau)
    field = np.linalg.det(mats)
    from .propagator import symmetrize_field

    field = symmetrize_field(field)
    header = [f"x{i+1}" for i in range(n)] + ["re_psi", "im_psi", "abs2_psi"]
    rows = _field_rows([axis] * n, field)
    manifest = _manifest_base("tonks", config)
    manifest["wall_clock_s"] = round(time.perf_counter() - start, 3)
    _emit(out_dir, {"tonks.csv": _csv_bytes(header, rows)}, manifest)
    return EXIT_OK


_EVOLVE_SCHEMA = {
    "n": (int, True, None),
    "c": (float, True, None),
    "t": (list, True, None),
    "eta": (float, False, 0.0),
    "packets": (list, True, None),
    "grid": (dict, False, {}),
    "xgrid": (dict, True, None),
    "method": (str, False, "spectral"),
    "ygrid": (dict, False, None),
}


def cmd_evolve(config: dict, out_dir) -> int:
    import numpy as np

    from .evolution import (
        evolve_convolution,
        evolve_spectral_grid,
        norm_squared,
    )
    from .propagator import symmetrize_field

    cfg = _expect(config, "config", _EVOLVE_SCHEMA)
    n = cfg["n"]
    state = _parse_packets(cfg["packets"], "config.packets")
    if state.n != n:
        raise ConfigError(f"config.packets: expected {n} packets")
    times = cfg["t"]
    if not times or not all(
        isinstance(t, (int, float)) and not isinstance(t, bool) and t >= 0
        for t in times
    ):
        raise ConfigError("config.t: need a nonempty list of times >= 0")
    if cfg["method"] not in ("spectral", "convolution"):
        raise ConfigError("config.method: 'spectral' or 'convolution'")
    if cfg["method"] == "convolution" and cfg["eta"] <= 0.0:
        raise ConfigError("config.eta: convolution evolution needs eta > 0")
    axis = _parse_xgrid(cfg["xgrid"], "config.xgrid", n)
    gc = _expect(cfg["grid"], "config.grid", _GRID_SCHEMA)
    y_axis = None
    if cfg["ygrid"] is not None:
        y_axis = _parse_xgrid(cfg["ygrid"], "config.ygrid", 1)

    start = time.perf_counter()
    files = {}
    slices = []
    header = [f"x{i+1}" for i in range(n)] + ["re_psi", "im_psi", "abs2_psi"]
    for idx, t in enumerate(sorted(float(t) for t in times)):
        if cfg["method"] == "spectral":
            ev = evolve_spectral_grid(
                axis, state, t=t, c=cfg["c"], eta=cfg["eta"],
                eps=gc["eps"], n_k_ceiling=gc["ceiling"],
            )
            field = ev.values
        else:
            from dataclasses import replace

            mesh = np.meshgrid(*([axis] * n), indexing="ij")
            pts = np.stack([m.ravel() for m in mesh], axis=-1)
            ev = evolve_convolution(
                pts, state, t=t, eta=cfg["eta"], c=cfg["c"],
                y_axis=y_axis, eps=gc["eps"], n_k_ceiling=gc["ceiling"],
            )
            field = ev.values.reshape([axis.size] * n)
            ev = replace(
                ev, values=field, kind="grid", points=None, axis=axis
            )
        norm = norm_squared(ev)
        name = f"evolve_t{idx}.csv"
        files[name] = _csv_bytes(header, _field_rows([axis] * n, symmetrize_field(field)))
        slices.append(
            {"file": name, "t": t, "norm_squared": norm,
             "grid": ev.grid.echo()}
        )
    manifest = _manifest_base("evolve", config)
    manifest["truncation_bound"] = state.truncation_bound()
    manifest["min_gap_ratio"] = state.min_gap_ratio
    manifest["slices"] = slices
    manifest["wall_clock_s"] = round(time.perf_counter() - start, 3)
    _emit(out_dir, files, manifest)
    return EXIT_OK


_ORACLE_SCHEMA = dict(_EVOLVE_SCHEMA, lattice=(dict, True, None))
_LATTICE_SCHEMA = {
    "L": (float, True, None),
    "n_x": (int, True, None),
    "dt": (float, True, None),
    "w": (float, True, None),
}


def cmd_oracle_n2(config: dict, out_dir) -> int:
    from .evolution import evolve_spectral_grid
    from .lattice import (
        LatticeConfig,
        compare_to_bethe,
        evolve_lattice,
        init_from_packets,
    )

    cfg = _expect(config, "config", _ORACLE_SCHEMA)
    if cfg["n"] != 2:
        raise ConfigError("config.n: the lattice oracle is two-particle only")
    state = _parse_packets(cfg["packets"], "config.packets")
    lat = _expect(cfg["lattice"], "config.lattice", _LATTICE_SCHEMA)
    times = sorted(float(t) for t in cfg["t"])
    if not times or times[0] < 0:
        raise ConfigError("config.t: need a nonempty list of times >= 0")
    gc = _expect(cfg["grid"], "config.grid", _GRID_SCHEMA)
    try:
        lcfg = LatticeConfig(L=lat["L"], n_x=lat["n_x"], dt=lat["dt"], w=lat["w"], c=cfg["c"])
        g = init_from_packets(lcfg, state)
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc

    start = time.perf_counter()
    comparisons = []
    telemetry = []
    for t in times:
        g, tele = evolve_lattice(lcfg, g, t)
        bethe = evolve_spectral_grid(
            lcfg.axis, state, t=t, c=cfg["c"], eta=cfg["eta"],
            eps=gc["eps"], n_k_ceiling=gc["ceiling"],
        )
        comparisons.append({"t": t, "relative_l2": compare_to_bethe(lcfg, g, bethe)})
        telemetry.append({"t": t, **tele})
    manifest = _manifest_base("oracle-n2", config)
    manifest["comparisons"] = comparisons
    manifest["lattice_telemetry"] = telemetry
    manifest["wall_clock_s"] = round(time.perf_counter() - start, 3)
    report = json.dumps(
        {"comparisons": comparisons, "telemetry": telemetry}, indent=2, sort_keys=True
    ).encode() + b"\n"
    _emit(out_dir, {"oracle_n2_report.json": report}, manifest)
    return EXIT_OK


_VERIFY_SCHEMA = {
    "suites": (list, False, ["all"]),
    "seed": (int, False, 0),
    "tolerance_scale": (float, False, 1.0),
}


def cmd_verify(config: dict, out_dir, seed_override=None) -> int:
    from .verify import run_checks

    cfg = _expect(config, "config", _VERIFY_SCHEMA)
    seed = seed_override if seed_override is not None else cfg["seed"]
    if cfg["tolerance_scale"] < 0.0:
        raise ConfigError("config.tolerance_scale: must be >= 0")
    try:
        report = run_checks(cfg["suites"], seed=seed, tolerance_scale=cfg["tolerance_scale"])
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    for chk in report["checks"]:
        status = "PASS" if chk["passed"] else "FAIL"
        extra = f" error={chk['error']}" if chk["error"] else ""
        print(f"[{status}] {chk['name']} ({chk['runtime_s']:.1f}s){extra}")
    manifest = _manifest_base("verify", config)
    manifest["wall_clock_s"] = round(sum(c["runtime_s"] for c in report["checks"]), 3)
    _emit(
        out_dir,
        {"verify_report.json": json.dumps(report, indent=2, sort_keys=True).encode() + b"\n"},
        manifest,
    )
    return EXIT_OK if report["all_passed"] else EXIT_VERIFY_FAILED


# ---------------------------------------------------------------------------
# entry point
# ---------------------------------------------------------------------------

_COMMANDS = {
    "propagator": (cmd_propagator, True),
    "evolve": (cmd_evolve, True),
    "tonks": (cmd_tonks, True),
    "oracle-n2": (cmd_oracle_n2, True),
    "verify": (cmd_verify, False),
}


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="deltagas",
        description="Exact dynamics of the one-dimensional delta-interaction Bose gas",
    )
    sub = parser.add_subparsers(dest="command", required=True)
    for name, (_, config_required) in _COMMANDS.items():
        p = sub.add_parser(name)
        p.add_argument("--config", required=config_required, default=None)
        p.add_argument("--out", default="deltagas-out")
        p.add_argument("--seed", type=int, default=None)
        p.add_argument("--threads", type=int, default=None)
    return parser


def _set_threads(threads) -> None:
    if threads is None:
        threads = os.environ.get("DELTAGAS_THREADS")
    if threads is None:
        return
    for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
        os.environ[var] = str(threads)


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    _set_threads(args.threads)
    try:
        if args.config is None:
            config = {}
        else:
            try:
                with open(args.config) as fh:
                    config = json.load(fh)
            except OSError as exc:
                raise ConfigError(f"cannot read config: {exc}") from exc
            except json.JSONDecodeError as exc:
                raise ConfigError(f"malformed JSON: {exc}") from exc
        handler, _ = _COMMANDS[args.command]
        if args.command == "verify":
            return handler(config, args.out, seed_override=args.seed)
        return handler(config, args.out)
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except Exception as exc:  # noqa: BLE001
        from .quadrature import GridInfeasibleError, NonFiniteIntegrandError

        if isinstance(exc, GridInfeasibleError):
            print(f"infeasible grid: {exc}", file=sys.stderr)
            return EXIT_INFEASIBLE
        import numpy as np

        if isinstance(exc, (NonFiniteIntegrandError, FloatingPointError, np.linalg.LinAlgError)):
            print(f"numerical abort: {exc}", file=sys.stderr)
            return EXIT_NUMERICAL
        if isinstance(exc, ValueError):
            print(f"config error: {exc}", file=sys.stderr)
            return EXIT_CONFIG
        raise


if __name__ == "__main__":
    sys.exit(main())
