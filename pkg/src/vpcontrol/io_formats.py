"""Artifact readers and writers plus the growth-rate reduction.

Every writer is deterministic byte-for-byte for identical inputs: floats
are rendered with 17 significant digits, rows follow a fixed order and
JSON keys are sorted.  The state dump is a one-line JSON header followed
by little-endian 64-bit floats in x-major order.
"""

from __future__ import annotations

import json
from pathlib import Path
from typing import Sequence

import numpy as np

from vpcontrol.control import ControlField
from vpcontrol.core import DistributionState, FormatError, PhaseSpaceGrid
from vpcontrol.dispersion import DispersionRoot
from vpcontrol.landscape import LandscapeResult
from vpcontrol.optimize import OptimizationHistory


def fmt(x: float) -> str:
    """Render a float with 17 significant digits (lossless round trip)."""
    return f"{float(x):.17g}"


def write_json(path, payload: dict) -> None:
    Path(path).write_text(json.dumps(payload, indent=2, sort_keys=True) + "\n")


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


# -- energy series -----------------------------------------------------------

def write_energy_csv(path, times: np.ndarray, energy: np.ndarray) -> None:
    lines = ["t,energy"]
    for t, e in zip(times, energy):
        lines.append(f"{fmt(t)},{fmt(e)}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_energy_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0] != "t,energy":
        raise FormatError(f"{path}: expected 't,energy' header")
    data = np.array([[float(c) for c in row.split(",")] for row in rows[1:]])
    return data[:, 0], data[:, 1]


# -- field history ------------------------------------------------------------

def write_field_history_csv(path, times: np.ndarray, x: np.ndarray, fields: np.ndarray) -> None:
    lines = ["t,x,E"]
    for i, t in enumerate(times):
        for j, xj in enumerate(x):
            lines.append(f"{fmt(t)},{fmt(xj)},{fmt(fields[i, j])}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_field_history_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0] != "t,x,E":
        raise FormatError(f"{path}: expected 't,x,E' header")
    data = np.array([[float(c) for c in row.split(",")] for row in rows[1:]])
    times = np.unique(data[:, 0])
    x = np.unique(data[:, 1])
    fields = data[:, 2].reshape(times.size, x.size)
    return times, x, fields


# -- state dumps ---------------------------------------------------------------

def write_state_dump(path, state: DistributionState, grid: PhaseSpaceGrid) -> None:
    header = {
        "Mx": grid.Mx,
        "Mv": grid.Mv,
        "Lx": grid.Lx,
        "Lv": grid.Lv,
        "T": state.time,
    }
    with open(path, "wb") as fh:
        fh.write((json.dumps(header, sort_keys=True) + "\n").encode("ascii"))
        fh.write(np.ascontiguousarray(state.values, dtype="<f8").tobytes())


def read_state_dump(path):
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise FormatError(f"{path}: missing header line", offset=0)
    try:
        header = json.loads(raw[:newline].decode("ascii"))
    except (UnicodeDecodeError, json.JSONDecodeError) as err:
        raise FormatError(f"{path}: unreadable header ({err})", offset=0) from err
    for key in ("Mx", "Mv", "Lx", "Lv", "T"):
        if key not in header:
            raise FormatError(f"{path}: header lacks '{key}'", offset=0)
    expected = int(header["Mx"]) * int(header["Mv"]) * 8
    payload = raw[newline + 1 :]
    if len(payload) != expected:
        raise FormatError(
            f"{path}: payload has {len(payload)} bytes, expected {expected}",
            offset=newline + 1 + min(len(payload), expected),
        )
    values = np.frombuffer(payload, dtype="<f8").reshape(int(header["Mx"]), int(header["Mv"]))
    grid = PhaseSpaceGrid(int(header["Mx"]), int(header["Mv"]), float(header["Lx"]), float(header["Lv"]))
    return DistributionState(values=values.copy(), time=float(header["T"])), grid


# -- control fields ------------------------------------------------------------

def write_control_json(path, field: ControlField) -> None:
    d = field.to_dict()
    payload = {"N": d["N"], "k0": d["k0"], "a": [float(v) for v in d["a"]], "b": [float(v) for v in d["b"]]}
    write_json(path, payload)


def read_control_json(path) -> ControlField:
    return ControlField.from_dict(read_json(path))


# -- dispersion roots ------------------------------------------------------------

def write_roots_json(path, roots: Sequence[DispersionRoot], status: str = "ok") -> None:
    payload = {
        "status": status,
        "roots": [
            {"mode": r.mode, "re": r.s0.real, "im": r.s0.imag, "residual": r.residual}
            for r in roots
        ],
    }
    write_json(path, payload)


def read_roots_json(path):
    payload = read_json(path)
    roots = [
        DispersionRoot(mode=int(r["mode"]), s0=complex(r["re"], r["im"]), residual=float(r["residual"]))
        for r in payload["roots"]
    ]
    return roots, payload["status"]


# -- optimization histories -------------------------------------------------------

def write_history_csv(path, history: OptimizationHistory) -> None:
    n_params = len(history.params[0])
    header = ["iter", "objective", "grad_norm", "step"] + [f"p{i}" for i in range(n_params)]
    lines = [",".join(header)]
    for it, theta in enumerate(history.params):
        grad = history.grad_norms[it] if it < len(history.grad_norms) else float("nan")
        step = history.steps[it] if it < len(history.steps) else float("nan")
        cells = [str(it), fmt(history.objectives[it]), fmt(grad), fmt(step)]
        cells += [fmt(p) for p in theta]
        lines.append(",".join(cells))
    Path(path).write_text("\n".join(lines) + "\n")


def read_history_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows or not rows[0].startswith("iter,objective,grad_norm,step"):
        raise FormatError(f"{path}: unexpected history header")
    out = {"iter": [], "objective": [], "grad_norm": [], "step": [], "params": []}
    for row in rows[1:]:
        cells = row.split(",")
        out["iter"].append(int(cells[0]))
        out["objective"].append(float(cells[1]))
        out["grad_norm"].append(float(cells[2]))
        out["step"].append(float(cells[3]))
        out["params"].append([float(c) for c in cells[4:]])
    out["params"] = np.array(out["params"])
    return out


# -- landscape surfaces -----------------------------------------------------------

def write_landscape_csv(path, result: LandscapeResult) -> None:
    if result.values.ndim == 1:
        lines = ["param,value,status"]
        for x, v, ok in zip(result.axis_values[0], result.values, result.ok):
            lines.append(f"{fmt(x)},{fmt(v)},{'ok' if ok else 'failed'}")
    else:
        lines = ["p1,p2,value,status"]
        for i, x1 in enumerate(result.axis_values[0]):
            for j, x2 in enumerate(result.axis_values[1]):
                ok = result.ok[i, j]
                lines.append(f"{fmt(x1)},{fmt(x2)},{fmt(result.values[i, j])},{'ok' if ok else 'failed'}")
    Path(path).write_text("\n".join(lines) + "\n")


def read_landscape_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows:
        raise FormatError(f"{path}: empty landscape file")
    if rows[0] == "param,value,status":
        params, values, ok = [], [], []
        for row in rows[1:]:
            cells = row.split(",")
            params.append(float(cells[0]))
            values.append(float(cells[1]))
            ok.append(cells[2] == "ok")
        return {
            "axes": [np.array(params)],
            "values": np.array(values),
            "ok": np.array(ok, dtype=bool),
        }
    if rows[0] == "p1,p2,value,status":
        data = [row.split(",") for row in rows[1:]]
        p1 = np.array([float(r[0]) for r in data])
        p2 = np.array([float(r[1]) for r in data])
        values = np.array([float(r[2]) for r in data])
        ok = np.array([r[3] == "ok" for r in data], dtype=bool)
        ax1, ax2 = np.unique(p1), np.unique(p2)
        return {
            "axes": [ax1, ax2],
            "values": values.reshape(ax1.size, ax2.size),
            "ok": ok.reshape(ax1.size, ax2.size),
        }
    raise FormatError(f"{path}: unrecognised landscape header '{rows[0]}'")


# -- growth rate ---------------------------------------------------------------------

def fit_growth_rate(times: np.ndarray, energy: np.ndarray, t_window: tuple) -> float:
    """Least-squares slope of log(energy) over the time window."""
    t0, t1 = t_window
    sel = (times >= t0) & (times <= t1)
    if not np.any(sel):
        raise ValueError(f"window [{t0}, {t1}] selects no samples")
    e = np.asarray(energy)[sel]
    if np.any(e <= 0):
        raise ValueError("energy series is not strictly positive on the window")
    return float(np.polyfit(np.asarray(times)[sel], np.log(e), 1)[0])
