"""Named experiment presets for the two canonical instabilities.

Every number here mirrors the reference setup: 256x256 phase-space
nodes, dt = 0.1, two-stream on a 10*pi x [-6, 6) box until T = 30 and
bump-on-tail on a 20*pi x [-9, 9) box until T = 40, perturbation
amplitude 1e-3 on spatial mode 1.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from vpcontrol.control import zero_control
from vpcontrol.core import ConfigurationError, PhaseSpaceGrid, RecordFlags, SimulationConfig, make_grid
from vpcontrol.equilibria import (
    AdditiveBumpCosine,
    BumpOnTail,
    EquilibriumSpec,
    MultiplicativeCosine,
    PerturbationSpec,
    TwoStream,
)


@dataclass(frozen=True)
class ProblemPreset:
    name: str
    Mx: int
    Mv: int
    Lx: float
    Lv: float
    dt: float
    T: float
    equilibrium: EquilibriumSpec
    perturbation: PerturbationSpec
    under_order: int  # control order of the under-parametrized setup
    under_free: tuple  # free indices into the packed (a, b) vector
    near_box: tuple  # per-coordinate init range
    constant_stepsize: float
    growth_window: tuple

    def grid(self) -> PhaseSpaceGrid:
        return make_grid(self.Mx, self.Mv, self.Lx, self.Lv)

    def config(
        self,
        eps: float = None,
        record: RecordFlags = None,
        dt: float = None,
        T: float = None,
        grid: PhaseSpaceGrid = None,
    ) -> SimulationConfig:
        grid = grid or self.grid()
        pert = self.perturbation
        if eps is not None:
            pert = type(pert)(eps=eps, mode=pert.mode)
        return SimulationConfig(
            grid=grid,
            dt=dt if dt is not None else self.dt,
            T=T if T is not None else self.T,
            equilibrium=self.equilibrium,
            perturbation=pert,
            control=zero_control(grid.k0),
            record=record or RecordFlags(),
        )

    def under_mask(self) -> np.ndarray:
        mask = np.zeros(2 * self.under_order, dtype=bool)
        mask[list(self.under_free)] = True
        return mask


TWO_STREAM = ProblemPreset(
    name="two-stream",
    Mx=256,
    Mv=256,
    Lx=10 * np.pi,
    Lv=6.0,
    dt=0.1,
    T=30.0,
    equilibrium=TwoStream(alpha=0.5, mu=2.4),
    perturbation=MultiplicativeCosine(eps=0.001, mode=1),
    under_order=2,  # H = b1 sin(k0 x) + b2 sin(2 k0 x)
    under_free=(2, 3),
    near_box=(-0.003, 0.001),
    constant_stepsize=1e-8,
    growth_window=(10.0, 25.0),
)

BUMP_ON_TAIL = ProblemPreset(
    name="bump-on-tail",
    Mx=256,
    Mv=256,
    Lx=20 * np.pi,
    Lv=9.0,
    dt=0.1,
    T=40.0,
    equilibrium=BumpOnTail(v1=-3.0, v2=4.5),
    perturbation=AdditiveBumpCosine(eps=0.001, mode=1),
    under_order=1,  # H = a1 cos(k0 x) + b1 sin(k0 x)
    under_free=(0, 1),
    near_box=(-0.001, 0.003),
    constant_stepsize=1e-9,
    growth_window=(15.0, 35.0),
)

PRESETS = {p.name: p for p in (TWO_STREAM, BUMP_ON_TAIL)}

#: initialization boxes shared by both examples (near boxes are per preset)
FAR_BOX = (-1.0, 1.0)
MID_BOX = (-0.05, 0.05)

OVER_ORDER = 14  # over-parametrized control: all of (a_1..a_14, b_1..b_14)

#: landscape sweep presets: (preset name, order, axes as (packed index, low, high, samples))
SWEEP_PRESETS = {
    # 1-d cuts: figure window [-0.07, 0.07] and text window [-0.1, 0.1]
    "ts-1d-fig": ("two-stream", 1, (((1, -0.07, 0.07, 29),))),
    "ts-1d-text": ("two-stream", 1, (((1, -0.1, 0.1, 29),))),
    "bot-1d-fig": ("bump-on-tail", 1, (((0, -0.07, 0.07, 29),))),
    "bot-1d-text": ("bump-on-tail", 1, (((0, -0.1, 0.1, 29),))),
    # 2-d boxes over the under-parametrized coefficients
    "ts-2d-far": ("two-stream", 2, ((2, -1.0, 1.0, 21), (3, -1.0, 1.0, 21))),
    "ts-2d-mid": ("two-stream", 2, ((2, -0.1, 0.1, 41), (3, -0.1, 0.1, 41))),
    "ts-2d-near": ("two-stream", 2, ((2, -0.003, 0.001, 41), (3, -0.003, 0.001, 41))),
    "bot-2d-far": ("bump-on-tail", 1, ((0, -1.0, 1.0, 21), (1, -1.0, 1.0, 21))),
    "bot-2d-mid": ("bump-on-tail", 1, ((0, -0.1, 0.1, 41), (1, -0.1, 0.1, 41))),
    "bot-2d-near": ("bump-on-tail", 1, ((0, -0.001, 0.003, 41), (1, -0.001, 0.003, 41))),
}


def get_preset(name: str) -> ProblemPreset:
    try:
        return PRESETS[name]
    except KeyError:
        raise ConfigurationError(
            f"unknown preset {name!r}; available: {sorted(PRESETS)}"
        ) from None


def sample_init(
    kind: str, preset: ProblemPreset, order: int, mask: np.ndarray, seed: int
) -> np.ndarray:
    """Seeded uniform draw of the free coordinates from the named box."""
    boxes = {"far": FAR_BOX, "mid": MID_BOX, "near": preset.near_box}
    if kind not in boxes:
        raise ConfigurationError(f"unknown init kind {kind!r}")
    low, high = boxes[kind]
    rng = np.random.default_rng(seed)
    theta = np.zeros(2 * order)
    theta[mask] = rng.uniform(low, high, size=int(mask.sum()))
    return theta
