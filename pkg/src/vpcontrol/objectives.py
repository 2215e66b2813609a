"""Instability metrics evaluated on simulation traces.

Six objectives: final-time and time-integrated variants of the KL
divergence from equilibrium, the self-generated electric energy and the
L2 misfit.  Time integrals use the left-rectangle rule over the stored
n_steps + 1 series (the final entry is excluded).
"""

from __future__ import annotations

from enum import Enum

import numpy as np

from vpcontrol.core import (
    DistributionState,
    PhaseSpaceGrid,
    RecordFlags,
    SimulationConfig,
    SolverBlowUp,
)
from vpcontrol.equilibria import EquilibriumSpec, eval_equilibrium
from vpcontrol import solver

#: sentinel for failed forward solves: the largest finite double, so
#: optimizers reject the step instead of propagating NaN
OBJECTIVE_FAILURE = float(np.finfo(np.float64).max)

_KL_FLOOR = 1e-30


class ObjectiveKind(str, Enum):
    KL = "kl"
    EE = "ee"
    KLT = "klt"
    EET = "eet"
    L2 = "l2"
    L2T = "l2t"

    @property
    def time_integrated(self) -> bool:
        return self in (ObjectiveKind.KLT, ObjectiveKind.EET, ObjectiveKind.L2T)


def kl_divergence(
    state: DistributionState, spec: EquilibriumSpec, grid: PhaseSpaceGrid
) -> float:
    """sum f log(f / f_eq) dx dv with a 1e-30 floor on both factors."""
    feq = eval_equilibrium(spec, grid.v_nodes())[None, :]
    f = state.values
    ratio = f / np.maximum(feq, _KL_FLOOR)
    terms = np.where(f > _KL_FLOOR, f * np.log(np.maximum(ratio, _KL_FLOOR)), 0.0)
    return float(terms.sum()) * grid.dx * grid.dv


def l2_misfit(
    state: DistributionState, spec: EquilibriumSpec, grid: PhaseSpaceGrid
) -> float:
    """0.5 * sum (f - f_eq)^2 dx dv."""
    feq = eval_equilibrium(spec, grid.v_nodes())[None, :]
    return 0.5 * float(((state.values - feq) ** 2).sum()) * grid.dx * grid.dv


def required_record_flags(kind: ObjectiveKind) -> RecordFlags:
    return RecordFlags(
        kl_series=kind is ObjectiveKind.KLT,
        l2_series=kind is ObjectiveKind.L2T,
    )


def objective_from_trace(kind: ObjectiveKind, trace, config: SimulationConfig) -> float:
    """Reduce a finished trace to the requested scalar."""
    dt = config.dt
    if kind is ObjectiveKind.EE:
        return float(trace.energy[-1])
    if kind is ObjectiveKind.EET:
        return float(trace.energy[:-1].sum()) * dt
    if kind is ObjectiveKind.KL:
        return kl_divergence(trace.final_state, config.equilibrium, config.grid)
    if kind is ObjectiveKind.KLT:
        if trace.kl_series is None:
            raise ValueError("trace lacks the KL series required by KLT")
        return float(trace.kl_series[:-1].sum()) * dt
    if kind is ObjectiveKind.L2:
        return l2_misfit(trace.final_state, config.equilibrium, config.grid)
    if kind is ObjectiveKind.L2T:
        if trace.l2_series is None:
            raise ValueError("trace lacks the L2 series required by L2T")
        return float(trace.l2_series[:-1].sum()) * dt
    raise ValueError(f"unknown objective kind {kind!r}")


def evaluate_objective(kind: ObjectiveKind | str, config: SimulationConfig) -> float:
    """Run the forward solve and reduce; failures map to the sentinel."""
    kind = ObjectiveKind(kind)
    cfg = config.with_record(required_record_flags(kind))
    try:
        trace = solver.run(cfg)
    except SolverBlowUp:
        return OBJECTIVE_FAILURE
    return objective_from_trace(kind, trace, cfg)
