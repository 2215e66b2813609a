"""Readers for the vpcontrol artifact formats.

Kept independent of the producing package on purpose: the interface is
the documented files, not the library.  State dumps are a one-line JSON
header (Mx, Mv, Lx, Lv, T) followed by little-endian float64 in x-major
order; tables are plain CSV with fixed headers.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np


class ArtifactError(ValueError):
    pass


@dataclass
class StateDump:
    values: np.ndarray  # (Mx, Mv)
    Lx: float
    Lv: float
    time: float


def read_state_dump(path) -> StateDump:
    raw = Path(path).read_bytes()
    newline = raw.find(b"\n")
    if newline < 0:
        raise ArtifactError(f"{path}: missing header line")
    header = json.loads(raw[:newline].decode("ascii"))
    Mx, Mv = int(header["Mx"]), int(header["Mv"])
    payload = raw[newline + 1 :]
    if len(payload) != Mx * Mv * 8:
        raise ArtifactError(f"{path}: truncated payload")
    values = np.frombuffer(payload, dtype="<f8").reshape(Mx, Mv)
    return StateDump(values=values, Lx=float(header["Lx"]), Lv=float(header["Lv"]), time=float(header["T"]))


def _read_csv(path, expected_header):
    rows = Path(path).read_text().strip().splitlines()
    if not rows or rows[0] != expected_header:
        raise ArtifactError(f"{path}: expected header '{expected_header}'")
    return rows[1:]


def read_energy_csv(path):
    data = np.array([[float(c) for c in row.split(",")] for row in _read_csv(path, "t,energy")])
    return data[:, 0], data[:, 1]


def read_field_history_csv(path):
    data = np.array([[float(c) for c in row.split(",")] for row in _read_csv(path, "t,x,E")])
    times = np.unique(data[:, 0])
    x = np.unique(data[:, 1])
    return times, x, data[:, 2].reshape(times.size, x.size)


def read_landscape_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows:
        raise ArtifactError(f"{path}: empty file")
    if rows[0] == "param,value,status":
        cells = [row.split(",") for row in rows[1:]]
        return {
            "axes": [np.array([float(c[0]) for c in cells])],
            "values": np.array([float(c[1]) for c in cells]),
        }
    if rows[0] == "p1,p2,value,status":
        cells = [row.split(",") for row in rows[1:]]
        p1 = np.array([float(c[0]) for c in cells])
        p2 = np.array([float(c[1]) for c in cells])
        values = np.array([float(c[2]) for c in cells])
        ax1, ax2 = np.unique(p1), np.unique(p2)
        return {"axes": [ax1, ax2], "values": values.reshape(ax1.size, ax2.size)}
    raise ArtifactError(f"{path}: unrecognised landscape header")


def read_history_csv(path):
    rows = Path(path).read_text().strip().splitlines()
    if not rows or not rows[0].startswith("iter,objective,grad_norm,step"):
        raise ArtifactError(f"{path}: unexpected history header")
    cells = [row.split(",") for row in rows[1:]]
    return {
        "objective": np.array([float(c[1]) for c in cells]),
        "params": np.array([[float(v) for v in c[4:]] for c in cells]),
    }


def read_json(path) -> dict:
    return json.loads(Path(path).read_text())


def equilibrium_profile(preset: str, v: np.ndarray) -> np.ndarray:
    """Closed-form equilibrium curves for the two documented presets."""
    if preset == "two-stream":
        return (np.exp(-0.5 * (v - 2.4) ** 2) + np.exp(-0.5 * (v + 2.4) ** 2)) / (
            2.0 * np.sqrt(2 * np.pi)
        )
    if preset == "bump-on-tail":
        return 0.9 / np.sqrt(2 * np.pi) * np.exp(-0.5 * (v + 3.0) ** 2) + np.sqrt(2) / (
            10 * np.sqrt(np.pi)
        ) * np.exp(-2.0 * (v - 4.5) ** 2)
    raise ArtifactError(f"unknown preset {preset!r} in manifest")
