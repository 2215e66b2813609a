"""Objective landscapes over 1- or 2-parameter boxes.

A sweep solves the forward problem once per grid node of the requested
parameter box.  Cells are independent, so they may be evaluated by a
process pool; results are stored by cell index, making the surface
independent of evaluation order and worker count.
"""

from __future__ import annotations

from concurrent.futures import Executor
from dataclasses import dataclass
from typing import Optional

import numpy as np

from vpcontrol.core import ConfigurationError, SimulationConfig
from vpcontrol.objectives import OBJECTIVE_FAILURE, ObjectiveKind
from vpcontrol.optimize import ObjectiveEvaluator


@dataclass(frozen=True)
class AxisSpec:
    """One swept parameter: index into the packed (a, b) vector plus range."""

    param_index: int
    low: float
    high: float
    samples: int

    def __post_init__(self):
        if self.samples < 3:
            raise ConfigurationError(f"need at least 3 samples per axis, got {self.samples}")
        if not self.low < self.high:
            raise ConfigurationError(f"axis range is empty: [{self.low}, {self.high}]")

    def values(self) -> np.ndarray:
        return np.linspace(self.low, self.high, self.samples)


@dataclass
class LandscapeSpec:
    objective: ObjectiveKind
    base_config: SimulationConfig
    order: int  # control order N; packed vectors have length 2N
    axes: tuple
    base_theta: Optional[np.ndarray] = None  # fixed coordinates, defaults to zero
    name: str = "custom"

    def __post_init__(self):
        self.objective = ObjectiveKind(self.objective)
        self.axes = tuple(self.axes)
        if not 1 <= len(self.axes) <= 2:
            raise ConfigurationError("a landscape sweeps one or two axes")
        for ax in self.axes:
            if not 0 <= ax.param_index < 2 * self.order:
                raise ConfigurationError(
                    f"axis index {ax.param_index} outside packed vector of length {2 * self.order}"
                )
        if self.base_theta is None:
            self.base_theta = np.zeros(2 * self.order)
        else:
            self.base_theta = np.asarray(self.base_theta, dtype=float)


@dataclass
class LandscapeResult:
    spec: LandscapeSpec
    axis_values: list  # one array per axis
    values: np.ndarray  # shape (s1,) or (s1, s2)
    ok: np.ndarray  # same shape, boolean

    @property
    def n_failed(self) -> int:
        return int((~self.ok).sum())


def _cell_thetas(spec: LandscapeSpec) -> list:
    axes = [ax.values() for ax in spec.axes]
    thetas = []
    if len(axes) == 1:
        for v in axes[0]:
            theta = spec.base_theta.copy()
            theta[spec.axes[0].param_index] = v
            thetas.append(theta)
    else:
        for v1 in axes[0]:
            for v2 in axes[1]:
                theta = spec.base_theta.copy()
                theta[spec.axes[0].param_index] = v1
                theta[spec.axes[1].param_index] = v2
                thetas.append(theta)
    return thetas


def sweep(spec: LandscapeSpec, executor: Optional[Executor] = None) -> LandscapeResult:
    """Evaluate the objective at every node of the parameter box."""
    evaluator = ObjectiveEvaluator(spec.objective, spec.base_config, spec.order)
    thetas = _cell_thetas(spec)
    if executor is not None:
        flat = np.array(list(executor.map(evaluator, thetas)))
    else:
        flat = np.array([evaluator(t) for t in thetas])
    shape = tuple(ax.samples for ax in spec.axes)
    values = flat.reshape(shape)
    ok = values < OBJECTIVE_FAILURE
    return LandscapeResult(
        spec=spec, axis_values=[ax.values() for ax in spec.axes], values=values, ok=ok
    )


def count_local_minima(result: LandscapeResult):
    """Interior local minima: a count in 1-d, a cell list in 2-d.

    1-d: runs of equal values collapse to one; a run counts when it is
    strictly below its nearest differing neighbours and does not touch
    the boundary.  2-d: interior cells strictly below all 4 neighbours.
    """
    if result.n_failed:
        raise ValueError(f"{result.n_failed} failed cells present; cannot count minima")
    v = result.values
    if v.ndim == 1:
        runs = []  # (start, end inclusive, value)
        start = 0
        for i in range(1, len(v)):
            if v[i] != v[start]:
                runs.append((start, i - 1, v[start]))
                start = i
        runs.append((start, len(v) - 1, v[start]))
        count = 0
        for r, (s, e, val) in enumerate(runs):
            if s == 0 or e == len(v) - 1:
                continue
            if val < runs[r - 1][2] and val < runs[r + 1][2]:
                count += 1
        return count
    interior = v[1:-1, 1:-1]
    mask = (
        (interior < v[:-2, 1:-1])
        & (interior < v[2:, 1:-1])
        & (interior < v[1:-1, :-2])
        & (interior < v[1:-1, 2:])
    )
    return [(int(i) + 1, int(j) + 1) for i, j in zip(*np.nonzero(mask))]


def grid_minimizer(result: LandscapeResult) -> tuple:
    """Parameter coordinates of the smallest value on the grid."""
    idx = np.unravel_index(int(np.argmin(np.where(result.ok, result.values, np.inf))), result.values.shape)
    return tuple(result.axis_values[d][idx[d]] for d in range(result.values.ndim))
