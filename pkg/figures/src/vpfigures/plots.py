"""Figure builders for the three artifact classes.

All plotting is read-only over the artifact directories and writes PNGs
next to the inputs.  Missing files are reported and skipped rather than
raised, so a partially recorded run still yields a figure.
"""

from __future__ import annotations

import sys
from pathlib import Path

import matplotlib

matplotlib.use("Agg")

import matplotlib.pyplot as plt
import numpy as np
from matplotlib.colors import LogNorm

from vpfigures import artifacts

_DPI = 130


def _warn(msg: str) -> None:
    print(f"vpfigures: {msg}", file=sys.stderr)


def _save(fig, path: Path) -> Path:
    fig.savefig(path, dpi=_DPI)
    plt.close(fig)
    return path


def _energy_panel(ax, times, energy, label=None):
    positive = energy[energy > 0]
    if positive.size:
        ax.semilogy(times, np.maximum(energy, positive.min() * 1e-3), label=label)
    else:
        ax.plot(times, energy, label=label)
    ax.set_xlabel("t")
    ax.set_ylabel("electric energy")


def plot_run(run_dir, baseline_dir=None) -> list:
    """Four-panel run figure: equilibrium, final state, field history, energy.

    With ``baseline_dir`` the energy panel overlays the baseline series
    (controlled vs uncontrolled comparison).
    """
    run_dir = Path(run_dir)
    written = []
    needed = {
        "state": run_dir / "final_state.f64",
        "energy": run_dir / "energy.csv",
        "manifest": run_dir / "manifest.json",
    }
    missing = [name for name, p in needed.items() if not p.exists()]
    if len(missing) == len(needed):
        _warn(f"{run_dir}: no run artifacts found, nothing to plot")
        return written
    for name in missing:
        _warn(f"{run_dir}: missing {needed[name].name}, panel skipped")

    fig, axes = plt.subplots(1, 4, figsize=(16, 3.4), constrained_layout=True)

    preset = None
    if "manifest" not in missing:
        preset = artifacts.read_json(needed["manifest"])["config"].get("preset")

    if "state" not in missing:
        dump = artifacts.read_state_dump(needed["state"])
        v = -dump.Lv + np.arange(dump.values.shape[1]) * (2 * dump.Lv / dump.values.shape[1])
        if preset is not None:
            axes[0].plot(v, artifacts.equilibrium_profile(preset, v))
            axes[0].set_title("equilibrium f(v)")
            axes[0].set_xlabel("v")
        im = axes[1].imshow(
            dump.values.T,
            origin="lower",
            aspect="auto",
            extent=[0, dump.Lx, -dump.Lv, dump.Lv],
            cmap="viridis",
        )
        axes[1].set_title(f"f(t={dump.time:g}, x, v)")
        axes[1].set_xlabel("x")
        axes[1].set_ylabel("v")
        fig.colorbar(im, ax=axes[1])

    history_path = run_dir / "field_history.csv"
    if history_path.exists():
        times, x, fields = artifacts.read_field_history_csv(history_path)
        scale = np.max(np.abs(fields)) or 1.0
        im = axes[2].imshow(
            fields.T,
            origin="lower",
            aspect="auto",
            extent=[times[0], times[-1], x[0], x[-1]],
            cmap="RdBu_r",
            vmin=-scale,
            vmax=scale,
        )
        axes[2].set_title("E(t, x)")
        axes[2].set_xlabel("t")
        axes[2].set_ylabel("x")
        fig.colorbar(im, ax=axes[2])
    else:
        _warn(f"{run_dir}: missing field_history.csv, panel skipped")

    if "energy" not in missing:
        times, energy = artifacts.read_energy_csv(needed["energy"])
        label = "run" if baseline_dir else None
        _energy_panel(axes[3], times, energy, label=label)
        if baseline_dir is not None:
            base_path = Path(baseline_dir) / "energy.csv"
            if base_path.exists():
                bt, be = artifacts.read_energy_csv(base_path)
                _energy_panel(axes[3], bt, be, label="baseline")
                axes[3].legend()
            else:
                _warn(f"{baseline_dir}: missing energy.csv, overlay skipped")
        axes[3].set_title("electric energy")

    written.append(_save(fig, run_dir / "run_overview.png"))
    return written


def plot_landscape(sweep_dirs) -> list:
    """One panel per sweep directory: 1-d curves with the minimum marked,
    2-d heatmaps (log colour scale when values span decades)."""
    dirs = [Path(d) for d in (sweep_dirs if isinstance(sweep_dirs, (list, tuple)) else [sweep_dirs])]
    panels = []
    for d in dirs:
        path = d / "landscape.csv"
        if not path.exists():
            _warn(f"{d}: missing landscape.csv, skipped")
            continue
        sidecar = d / "landscape_spec.json"
        meta = artifacts.read_json(sidecar) if sidecar.exists() else {}
        panels.append((d, artifacts.read_landscape_csv(path), meta))
    if not panels:
        _warn("no landscape artifacts found, nothing to plot")
        return []

    fig, axes = plt.subplots(1, len(panels), figsize=(4.2 * len(panels), 3.4), constrained_layout=True)
    if len(panels) == 1:
        axes = [axes]
    for ax, (d, surface, meta) in zip(axes, panels):
        title = meta.get("objective", d.name)
        if surface["values"].ndim == 1:
            x, y = surface["axes"][0], surface["values"]
            ax.plot(x, y, marker=".")
            i = int(np.argmin(y))
            ax.plot([x[i]], [y[i]], marker="v", color="tab:red")
            ax.set_xlabel("parameter")
            ax.set_yscale("log" if y.min() > 0 and y.max() / y.min() > 50 else "linear")
        else:
            values = surface["values"]
            span = values.max() / max(values.min(), 1e-300)
            norm = LogNorm(vmin=max(values.min(), 1e-300), vmax=values.max()) if (
                values.min() > 0 and span > 50
            ) else None
            im = ax.imshow(
                values.T,
                origin="lower",
                aspect="auto",
                extent=[
                    surface["axes"][0][0],
                    surface["axes"][0][-1],
                    surface["axes"][1][0],
                    surface["axes"][1][-1],
                ],
                norm=norm,
                cmap="viridis",
            )
            fig.colorbar(im, ax=ax)
            ax.set_xlabel("p1")
            ax.set_ylabel("p2")
        ax.set_title(title)
    out = dirs[0] / "landscape_overview.png"
    return [_save(fig, out)]


def plot_optimization(opt_dir, sweep_dir=None) -> list:
    """Convergence curve, plus the iterate trajectory over a matching 2-d
    sweep when one is supplied (initial point marked)."""
    opt_dir = Path(opt_dir)
    history_path = opt_dir / "history.csv"
    if not history_path.exists():
        _warn(f"{opt_dir}: missing history.csv, nothing to plot")
        return []
    history = artifacts.read_history_csv(history_path)

    overlay = None
    if sweep_dir is not None:
        sweep_dir = Path(sweep_dir)
        surface = artifacts.read_landscape_csv(sweep_dir / "landscape.csv")
        meta = artifacts.read_json(sweep_dir / "landscape_spec.json")
        if surface["values"].ndim != 2:
            raise artifacts.ArtifactError(
                f"trajectory overlay needs a 2-d sweep, {sweep_dir} is 1-d"
            )
        axis_idx = [ax["index"] for ax in meta["axes"]]
        if max(axis_idx) >= history["params"].shape[1]:
            raise artifacts.ArtifactError(
                f"axis mismatch: sweep {sweep_dir} sweeps packed indices {axis_idx}, "
                f"history {history_path} has {history['params'].shape[1]} parameters"
            )
        overlay = (surface, meta, axis_idx)

    n_panels = 2 if overlay else 1
    fig, axes = plt.subplots(1, n_panels, figsize=(4.6 * n_panels, 3.6), constrained_layout=True)
    axes = np.atleast_1d(axes)

    obj = history["objective"]
    if np.all(obj > 0):
        axes[0].semilogy(np.arange(obj.size), obj)
    else:
        axes[0].plot(np.arange(obj.size), obj)
    axes[0].set_xlabel("iteration")
    axes[0].set_ylabel("objective")
    axes[0].set_title("convergence")

    if overlay:
        surface, meta, axis_idx = overlay
        values = surface["values"]
        norm = LogNorm(vmin=max(values.min(), 1e-300), vmax=values.max()) if (
            values.min() > 0 and values.max() / max(values.min(), 1e-300) > 50
        ) else None
        im = axes[1].imshow(
            values.T,
            origin="lower",
            aspect="auto",
            extent=[
                surface["axes"][0][0],
                surface["axes"][0][-1],
                surface["axes"][1][0],
                surface["axes"][1][-1],
            ],
            norm=norm,
            cmap="viridis",
        )
        fig.colorbar(im, ax=axes[1])
        traj = history["params"][:, axis_idx]
        axes[1].plot(traj[:, 0], traj[:, 1], color="white", lw=1.2)
        axes[1].plot([traj[0, 0]], [traj[0, 1]], marker="o", color="gold", ms=7)
        axes[1].set_title("trajectory over landscape")
        axes[1].set_xlabel("p1")
        axes[1].set_ylabel("p2")

    return [_save(fig, opt_dir / "optimization_overview.png")]
