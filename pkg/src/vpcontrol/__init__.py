"""Suppression of kinetic plasma instabilities with static external fields.

The package couples a semi-Lagrangian Vlasov-Poisson solver with linear
stability analysis and gradient-based control refinement:

- ``core``        grids, states, simulation configuration
- ``equilibria``  unstable equilibrium families and perturbed initial data
- ``control``     truncated-Fourier static control fields
- ``solver``      split-step semi-Lagrangian forward solver
- ``dispersion``  Laplace-transform stability analysis and control synthesis
- ``objectives``  instability metrics (KL, electric energy, L2, time-integrated)
- ``optimize``    finite-difference gradient descent, strong-Wolfe line search
- ``landscape``   objective sweeps over control-parameter boxes
- ``io_formats``  CSV/JSON/raw-state readers and writers
- ``cli``         batch entry point (simulate / guess / optimize / sweep)
"""

from vpcontrol.core import (
    PhaseSpaceGrid,
    DistributionState,
    RecordFlags,
    SimulationConfig,
    SimulationTrace,
    make_grid,
)

__version__ = "0.1.0"

__all__ = [
    "PhaseSpaceGrid",
    "DistributionState",
    "RecordFlags",
    "SimulationConfig",
    "SimulationTrace",
    "make_grid",
    "__version__",
]
