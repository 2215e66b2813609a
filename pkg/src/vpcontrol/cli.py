"""Batch entry point: simulate / guess / optimize / sweep.

One JSON config file drives any subcommand; keys a subcommand does not
use are ignored with a warning so a single file can describe a whole
experiment-matrix cell.  Every run writes a manifest with the fully
resolved configuration, and re-running a manifest reproduces the
artifacts byte for byte.
"""

from __future__ import annotations

import argparse
import json
import sys
from concurrent.futures import ProcessPoolExecutor
from pathlib import Path

import numpy as np

from vpcontrol import __version__, io_formats
from vpcontrol.control import ControlField, pack_params, unpack_params, zero_control
from vpcontrol.core import ConfigurationError, RecordFlags, SimulationConfig, make_grid
from vpcontrol.dispersion import NoUnstableRoot, find_root, synthesize_guess
from vpcontrol.landscape import AxisSpec, LandscapeSpec, sweep
from vpcontrol.objectives import ObjectiveKind
from vpcontrol.optimize import ObjectiveEvaluator, OptimizerConfig, gd_constant, gd_wolfe
from vpcontrol.presets import OVER_ORDER, SWEEP_PRESETS, get_preset, sample_init
from vpcontrol import solver

_KNOWN_KEYS = {
    "preset",
    "grid",
    "dt",
    "T",
    "epsilon",
    "control",
    "objective",
    "method",
    "parametrization",
    "init",
    "sweep",
    "workers",
    "out",
    "seed",
    "modes",
    "growth_window",
    "stepsize",
    "max_iters",
    "fd_step",
    "grad_tol",
    "f_tol",
    "record_fields",
}

_USED_KEYS = {
    "simulate": {"preset", "grid", "dt", "T", "epsilon", "control", "out", "growth_window", "record_fields", "workers", "seed"},
    "guess": {"preset", "grid", "dt", "T", "epsilon", "modes", "out", "workers", "seed"},
    "optimize": {
        "preset", "grid", "dt", "T", "epsilon", "objective", "method", "parametrization",
        "init", "out", "workers", "seed", "stepsize", "max_iters", "fd_step", "grad_tol",
        "f_tol", "growth_window", "control",
    },
    "sweep": {"preset", "grid", "dt", "T", "epsilon", "objective", "sweep", "out", "workers", "seed"},
}


def _warn(msg: str) -> None:
    print(f"warning: {msg}", file=sys.stderr)


def resolve_config(raw: dict, subcommand: str) -> dict:
    """Expand defaults into a complete, re-runnable configuration dict."""
    unknown = set(raw) - _KNOWN_KEYS
    for key in sorted(unknown):
        _warn(f"ignoring unknown config key {key!r}")
    unused = set(raw) & _KNOWN_KEYS - _USED_KEYS[subcommand] - {"preset"}
    for key in sorted(unused):
        _warn(f"config key {key!r} is not used by '{subcommand}'")

    preset = get_preset(raw.get("preset", "two-stream"))
    grid_raw = raw.get("grid", {})
    cfg = {
        "preset": preset.name,
        "grid": {
            "Mx": int(grid_raw.get("Mx", preset.Mx)),
            "Mv": int(grid_raw.get("Mv", preset.Mv)),
            "Lx": float(grid_raw.get("Lx", preset.Lx)),
            "Lv": float(grid_raw.get("Lv", preset.Lv)),
        },
        "dt": float(raw.get("dt", preset.dt)),
        "T": float(raw.get("T", preset.T)),
        "epsilon": float(raw.get("epsilon", preset.perturbation.eps)),
        "control": raw.get("control", {"N": 1, "a": [0.0], "b": [0.0]}),
        "objective": raw.get("objective", "eet"),
        "method": raw.get("method", "constant"),
        "parametrization": raw.get("parametrization", "under"),
        "init": {
            "kind": raw.get("init", {}).get("kind", "near"),
            "seed": int(raw.get("init", {}).get("seed", raw.get("seed", 0))),
            "vector": raw.get("init", {}).get("vector"),
        },
        "sweep": raw.get("sweep", {"preset": "ts-1d-fig"}),
        "workers": int(raw.get("workers", 1)),
        "seed": int(raw.get("seed", 0)),
        "modes": list(raw.get("modes", [1])),
        "growth_window": list(raw.get("growth_window", preset.growth_window)),
        "stepsize": float(raw.get("stepsize", preset.constant_stepsize)),
        "max_iters": int(raw.get("max_iters", 200)),
        "fd_step": float(raw.get("fd_step", 1e-6)),
        "grad_tol": float(raw.get("grad_tol", 0.0)),
        "f_tol": float(raw.get("f_tol", 0.0)),
        "record_fields": raw.get("record_fields", {"field_history": True}),
    }
    return cfg


def _control_from_config(cfg: dict, k0: float) -> ControlField:
    spec = cfg["control"]
    if "from" in spec:
        return io_formats.read_control_json(spec["from"])
    field = ControlField(
        a=np.asarray(spec.get("a", [0.0]), dtype=float),
        b=np.asarray(spec.get("b", [0.0]), dtype=float),
        k0=float(spec.get("k0", k0)),
    )
    if "N" in spec and int(spec["N"]) != field.order:
        raise ConfigurationError("control.N does not match coefficient arrays")
    return field


def _sim_config(cfg: dict, record: RecordFlags, control: ControlField = None) -> SimulationConfig:
    preset = get_preset(cfg["preset"])
    grid = make_grid(**cfg["grid"])
    control = control if control is not None else _control_from_config(cfg, grid.k0)
    return preset.config(eps=cfg["epsilon"], record=record, dt=cfg["dt"], T=cfg["T"], grid=grid).with_control(control)


def _write_manifest(out: Path, subcommand: str, cfg: dict) -> None:
    io_formats.write_json(out / "manifest.json", {
        "version": __version__,
        "subcommand": subcommand,
        "config": cfg,
    })


def cmd_simulate(cfg: dict, out: Path) -> int:
    record = RecordFlags(field_history=bool(cfg["record_fields"].get("field_history", True)))
    sim = _sim_config(cfg, record)
    try:
        trace = solver.run(sim)
    except Exception as err:  # noqa: BLE001 - diagnostic JSON on any run failure
        io_formats.write_json(out / "summary.json", {"status": "failed", "error": str(err)})
        _write_manifest(out, "simulate", cfg)
        return 1
    io_formats.write_energy_csv(out / "energy.csv", trace.times, trace.energy)
    if trace.field_history is not None:
        io_formats.write_field_history_csv(
            out / "field_history.csv", trace.times, sim.grid.x_nodes(), trace.field_history
        )
    io_formats.write_state_dump(out / "final_state.f64", trace.final_state, sim.grid)
    summary = {
        "status": "ok",
        "final_energy": float(trace.energy[-1]),
        "initial_energy": float(trace.energy[0]),
    }
    window = tuple(cfg["growth_window"])
    try:
        summary["growth_rate"] = io_formats.fit_growth_rate(trace.times, trace.energy, window)
        summary["growth_window"] = list(window)
    except ValueError as err:
        summary["growth_rate"] = None
        summary["growth_rate_error"] = str(err)
    io_formats.write_json(out / "summary.json", summary)
    _write_manifest(out, "simulate", cfg)
    return 0


def cmd_guess(cfg: dict, out: Path) -> int:
    sim = _sim_config(cfg, RecordFlags())
    grid = sim.grid
    if cfg["epsilon"] == 0.0:
        io_formats.write_roots_json(out / "roots.json", [], status="stable-trivial")
        io_formats.write_control_json(out / "control.json", zero_control(grid.k0))
        _write_manifest(out, "guess", cfg)
        return 0
    try:
        roots = {m: find_root(sim.equilibrium, m, grid) for m in cfg["modes"]}
    except NoUnstableRoot:
        io_formats.write_roots_json(out / "roots.json", [], status="stable")
        _write_manifest(out, "guess", cfg)
        return 0
    field = synthesize_guess(sim.equilibrium, sim.perturbation, grid, cfg["modes"], roots=roots)
    io_formats.write_roots_json(out / "roots.json", list(roots.values()), status="ok")
    io_formats.write_control_json(out / "control.json", field)
    _write_manifest(out, "guess", cfg)
    return 0


def _resolve_init(cfg: dict, preset, order: int, mask: np.ndarray, sim: SimulationConfig) -> np.ndarray:
    kind = cfg["init"]["kind"]
    if kind == "vector":
        vec = np.asarray(cfg["init"]["vector"], dtype=float)
        if vec.size != 2 * order:
            raise ConfigurationError(f"init vector must have length {2 * order}")
        return vec
    if kind == "guess":
        roots = {m: find_root(sim.equilibrium, m, sim.grid) for m in cfg["modes"]}
        guess = synthesize_guess(sim.equilibrium, sim.perturbation, sim.grid, cfg["modes"], roots=roots)
        theta = np.zeros(2 * order)
        packed = pack_params(guess)
        n = guess.order
        take = min(n, order)
        full = np.zeros(2 * order)
        full[:take] = packed[:take]
        full[order : order + take] = packed[n : n + take]
        theta[mask] = full[mask]
        return theta
    return sample_init(kind, preset, order, mask, cfg["init"]["seed"])


def cmd_optimize(cfg: dict, out: Path, executor=None) -> int:
    preset = get_preset(cfg["preset"])
    sim = _sim_config(cfg, RecordFlags(), control=zero_control(make_grid(**cfg["grid"]).k0))
    if cfg["parametrization"] == "under":
        order = preset.under_order
        mask = preset.under_mask()
    elif cfg["parametrization"] == "over":
        order = OVER_ORDER
        mask = np.ones(2 * order, dtype=bool)
    else:
        raise ConfigurationError(f"unknown parametrization {cfg['parametrization']!r}")

    kind = ObjectiveKind(cfg["objective"])
    evaluator = ObjectiveEvaluator(kind, sim, order)
    theta0 = _resolve_init(cfg, preset, order, mask, sim)
    opt = OptimizerConfig(
        init=theta0,
        method="wolfe" if cfg["method"] in ("wolfe", "adaptive") else "constant",
        mask=mask,
        stepsize=cfg["stepsize"],
        max_iters=cfg["max_iters"],
        fd_step=cfg["fd_step"],
        grad_tol=cfg["grad_tol"],
        f_tol=cfg["f_tol"],
    )
    driver = gd_wolfe if opt.method == "wolfe" else gd_constant
    history = driver(evaluator, opt, executor=executor)

    io_formats.write_history_csv(out / "history.csv", history)
    final_field = unpack_params(history.final_params, order, sim.grid.k0)
    io_formats.write_control_json(out / "control_optimized.json", final_field)

    final_sim = sim.with_control(final_field).with_record(RecordFlags(field_history=False))
    trace = solver.run(final_sim)
    io_formats.write_energy_csv(out / "final_energy.csv", trace.times, trace.energy)
    io_formats.write_state_dump(out / "final_state.f64", trace.final_state, sim.grid)

    summary = history.to_summary()
    summary.update(
        {
            "objective": kind.value,
            "method": opt.method,
            "parametrization": cfg["parametrization"],
            "final_energy": float(trace.energy[-1]),
            "theta_inf_norm": float(np.max(np.abs(history.final_params))),
            "non_physical": bool(np.max(np.abs(history.final_params)) > 0.1),
        }
    )
    io_formats.write_json(out / "optimize_summary.json", summary)
    _write_manifest(out, "optimize", cfg)
    return 0 if not history.status.startswith(("gradient_failure", "line_search_failure")) else 1


def cmd_sweep(cfg: dict, out: Path, executor=None) -> int:
    sweep_raw = cfg["sweep"]
    if "preset" in sweep_raw:
        name = sweep_raw["preset"]
        if name not in SWEEP_PRESETS:
            raise ConfigurationError(f"unknown sweep preset {name!r}; available: {sorted(SWEEP_PRESETS)}")
        preset_name, order, axes_raw = SWEEP_PRESETS[name]
        cfg = dict(cfg, preset=preset_name)
        axes = tuple(AxisSpec(*ax) for ax in axes_raw)
    else:
        name = "custom"
        order = int(sweep_raw.get("order", get_preset(cfg["preset"]).under_order))
        axes = tuple(
            AxisSpec(int(ax["index"]), float(ax["low"]), float(ax["high"]), int(ax["samples"]))
            for ax in sweep_raw["axes"]
        )
    sim = _sim_config(cfg, RecordFlags(), control=zero_control(make_grid(**cfg["grid"]).k0))
    spec = LandscapeSpec(
        objective=ObjectiveKind(cfg["objective"]),
        base_config=sim,
        order=order,
        axes=axes,
        name=name,
    )
    result = sweep(spec, executor=executor)
    io_formats.write_landscape_csv(out / "landscape.csv", result)
    io_formats.write_json(
        out / "landscape_spec.json",
        {
            "name": name,
            "objective": spec.objective.value,
            "order": order,
            "axes": [
                {"index": ax.param_index, "low": ax.low, "high": ax.high, "samples": ax.samples}
                for ax in spec.axes
            ],
            "failed_cells": result.n_failed,
        },
    )
    _write_manifest(out, "sweep", cfg)
    return 0 if result.n_failed < result.values.size else 1


def main(argv=None) -> int:
    parser = argparse.ArgumentParser(prog="vpcontrol", description=__doc__)
    parser.add_argument("subcommand", choices=["simulate", "guess", "optimize", "sweep"])
    parser.add_argument("--config", type=Path, help="JSON config file")
    parser.add_argument("--preset", help="problem preset name")
    parser.add_argument("--out", type=Path, default=Path("."), help="artifact directory")
    parser.add_argument("--workers", type=int, help="process pool size for parallel sections")
    parser.add_argument("--seed", type=int, help="seed for sampled initializations")
    args = parser.parse_args(argv)

    raw = {}
    if args.config:
        raw = json.loads(Path(args.config).read_text())
        if "config" in raw and "subcommand" in raw:  # accept a manifest as config
            raw = raw["config"]
    if args.preset:
        raw["preset"] = args.preset
    if args.workers is not None:
        raw["workers"] = args.workers
    if args.seed is not None:
        raw["seed"] = args.seed
        raw.setdefault("init", {})["seed"] = args.seed

    try:
        cfg = resolve_config(raw, args.subcommand)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2

    out = args.out
    out.mkdir(parents=True, exist_ok=True)

    executor = None
    try:
        if cfg["workers"] > 1 and args.subcommand in ("optimize", "sweep"):
            executor = ProcessPoolExecutor(max_workers=cfg["workers"])
        if args.subcommand == "simulate":
            return cmd_simulate(cfg, out)
        if args.subcommand == "guess":
            return cmd_guess(cfg, out)
        if args.subcommand == "optimize":
            return cmd_optimize(cfg, out, executor=executor)
        return cmd_sweep(cfg, out, executor=executor)
    except ConfigurationError as err:
        print(f"error: {err}", file=sys.stderr)
        return 2
    finally:
        if executor is not None:
            executor.shutdown()


if __name__ == "__main__":
    sys.exit(main())
