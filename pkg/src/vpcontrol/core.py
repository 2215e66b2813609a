"""Phase-space grids, distribution states and simulation configuration.

The phase-space box is [0, Lx) x [-Lv, Lv) with periodic boundary
conditions in x and homogeneous Dirichlet conditions in v.  Both grids
are uniform and half-open: the node at x = Lx coincides with x = 0, and
the node at v = +Lv is excluded so that Mv * dv spans the box exactly.
Velocity reads outside the box are treated as zero by the solver.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING, Optional

import numpy as np

if TYPE_CHECKING:  # pragma: no cover - import cycle guard for annotations only
    from vpcontrol.control import ControlField
    from vpcontrol.equilibria import EquilibriumSpec, PerturbationSpec


class ConfigurationError(ValueError):
    """Invalid grid or simulation parameters."""


class AliasingError(ConfigurationError):
    """Perturbation mode is not resolvable on the spatial grid."""


class SolverBlowUp(RuntimeError):
    """A simulation produced non-finite values or runaway characteristics."""


class FormatError(ValueError):
    """Malformed artifact file."""

    def __init__(self, message: str, offset: Optional[int] = None):
        if offset is not None:
            message = f"{message} (byte offset {offset})"
        super().__init__(message)
        self.offset = offset


@dataclass(frozen=True)
class PhaseSpaceGrid:
    """Uniform tensor grid for f(x, v).

    Attributes
    ----------
    Mx, Mv : number of spatial / velocity nodes
    Lx     : spatial period
    Lv     : velocity half-width
    """

    Mx: int
    Mv: int
    Lx: float
    Lv: float

    @property
    def dx(self) -> float:
        return self.Lx / self.Mx

    @property
    def dv(self) -> float:
        return 2.0 * self.Lv / self.Mv

    @property
    def k0(self) -> float:
        """Fundamental spatial wavenumber 2*pi/Lx."""
        return 2.0 * np.pi / self.Lx

    def x_nodes(self) -> np.ndarray:
        return np.arange(self.Mx) * self.dx

    def v_nodes(self) -> np.ndarray:
        return -self.Lv + np.arange(self.Mv) * self.dv


def make_grid(Mx: int, Mv: int, Lx: float, Lv: float) -> PhaseSpaceGrid:
    """Validate parameters and build a :class:`PhaseSpaceGrid`."""
    if Mx < 8 or Mv < 8:
        raise ConfigurationError(f"grid needs at least 8 nodes per axis, got {Mx}x{Mv}")
    if Lx <= 0 or Lv <= 0:
        raise ConfigurationError(f"domain lengths must be positive, got Lx={Lx}, Lv={Lv}")
    return PhaseSpaceGrid(Mx=int(Mx), Mv=int(Mv), Lx=float(Lx), Lv=float(Lv))


@dataclass
class DistributionState:
    """Sampled phase-space density, x-major layout (shape Mx x Mv)."""

    values: np.ndarray
    time: float = 0.0

    def copy(self) -> "DistributionState":
        return DistributionState(values=self.values.copy(), time=self.time)


def total_mass(state: DistributionState, grid: PhaseSpaceGrid) -> float:
    """Rectangle-rule mass integral of the state."""
    return float(state.values.sum() * grid.dx * grid.dv)


@dataclass(frozen=True)
class RecordFlags:
    """What a simulation run stores beyond the energy series.

    The electric-energy series is always recorded.  The per-step KL and
    L2 integrands are needed by the time-integrated objectives; the full
    field history and state snapshots are only needed for reporting.
    """

    field_history: bool = False
    snapshots: bool = False
    kl_series: bool = False
    l2_series: bool = False


@dataclass(frozen=True)
class SimulationConfig:
    grid: PhaseSpaceGrid
    dt: float
    T: float
    equilibrium: "EquilibriumSpec"
    perturbation: "PerturbationSpec"
    control: "ControlField"
    record: RecordFlags = field(default_factory=RecordFlags)

    def __post_init__(self):
        if self.dt <= 0:
            raise ConfigurationError(f"dt must be positive, got {self.dt}")
        n = self.T / self.dt
        if abs(n - round(n)) > 1e-9 * max(1.0, abs(n)):
            raise ConfigurationError(
                f"T={self.T} is not an integer multiple of dt={self.dt}"
            )

    @property
    def n_steps(self) -> int:
        return int(round(self.T / self.dt))

    def with_control(self, control: "ControlField") -> "SimulationConfig":
        return replace(self, control=control)

    def with_record(self, record: RecordFlags) -> "SimulationConfig":
        return replace(self, record=record)


@dataclass
class SimulationTrace:
    """Per-run diagnostics.

    ``energy`` has n_steps + 1 entries (the t=0 value is stored before the
    first step).  Optional series follow the same convention.  All fields
    are diagnostics of committed states at integer time steps.
    """

    times: np.ndarray
    energy: np.ndarray
    final_state: DistributionState
    field_history: Optional[np.ndarray] = None  # (n_steps+1, Mx)
    kl_series: Optional[np.ndarray] = None
    l2_series: Optional[np.ndarray] = None
    snapshots: Optional[list] = None
