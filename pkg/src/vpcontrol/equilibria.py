"""Unstable equilibrium families and perturbed initial conditions.

Both families are mixtures of Gaussians in v, so their velocity Fourier
transforms are available in closed form.  The transform convention is

    fhat(m) = int f(v) exp(-i m v) dv        (no 2*pi normalisation),

under which a component w * N(c, sigma^2) contributes
w * exp(-i c m) * exp(-sigma^2 m^2 / 2).  Spatial Fourier-series
coefficients use c_m = (1/Lx) int_0^Lx g(x) exp(-i m k0 x) dx, so a
cos(mode*k0*x) perturbation carries weight 1/2 on modes +-mode.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Tuple, Union

import numpy as np

from vpcontrol.core import AliasingError, DistributionState, PhaseSpaceGrid

_SQRT_2PI = np.sqrt(2.0 * np.pi)


@dataclass(frozen=True)
class TwoStream:
    """Two counter-drifting unit-variance Gaussian beams.

    f_eq(v) = [alpha exp(-(v-mu)^2/2) + (1-alpha) exp(-(v+mu)^2/2)] / sqrt(2 pi)
    """

    alpha: float = 0.5
    mu: float = 2.4


@dataclass(frozen=True)
class BumpOnTail:
    """Maxwellian bulk drifting at v1 with a fast small bump at v2.

    f_eq(v) = 0.9 N(v1, 1) + 0.1 N(v2, 1/4)
    """

    v1: float = -3.0
    v2: float = 4.5


EquilibriumSpec = Union[TwoStream, BumpOnTail]


@dataclass(frozen=True)
class MultiplicativeCosine:
    """Initial data (1 + eps cos(mode k0 x)) f_eq(v)."""

    eps: float = 0.001
    mode: int = 1


@dataclass(frozen=True)
class AdditiveBumpCosine:
    """Initial data f_eq(v) + eps g(v) cos(mode k0 x), g = the 0.1-mass bump."""

    eps: float = 0.001
    mode: int = 1


PerturbationSpec = Union[MultiplicativeCosine, AdditiveBumpCosine]


def gaussian_components(spec: EquilibriumSpec) -> Tuple[Tuple[float, float, float], ...]:
    """(weight, center, variance) triples of the mixture."""
    if isinstance(spec, TwoStream):
        return ((spec.alpha, spec.mu, 1.0), (1.0 - spec.alpha, -spec.mu, 1.0))
    if isinstance(spec, BumpOnTail):
        return ((0.9, spec.v1, 1.0), (0.1, spec.v2, 0.25))
    raise TypeError(f"unknown equilibrium spec {spec!r}")


def eval_equilibrium(spec: EquilibriumSpec, v) -> np.ndarray:
    """Closed-form equilibrium density at velocities v."""
    v = np.asarray(v, dtype=float)
    out = np.zeros_like(v)
    for w, c, var in gaussian_components(spec):
        out = out + w * np.exp(-0.5 * (v - c) ** 2 / var) / (_SQRT_2PI * np.sqrt(var))
    return out


def equilibrium_velocity_fourier(spec: EquilibriumSpec, m) -> np.ndarray:
    """fhat_eq(m) = int f_eq(v) exp(-i m v) dv, vectorised in m."""
    m = np.asarray(m, dtype=float)
    out = np.zeros(m.shape, dtype=complex)
    for w, c, var in gaussian_components(spec):
        out = out + w * np.exp(-1j * c * m) * np.exp(-0.5 * var * m**2)
    return out


def _bump_profile(spec: BumpOnTail, v) -> np.ndarray:
    # velocity factor of the additive perturbation; integrates to 1/10
    return np.sqrt(2.0) / (10.0 * np.sqrt(np.pi)) * np.exp(-2.0 * (np.asarray(v) - spec.v2) ** 2)


def perturbation_velocity_profile(
    pert: PerturbationSpec, spec: EquilibriumSpec, v
) -> np.ndarray:
    """Velocity factor of the initial perturbation (without eps)."""
    if isinstance(pert, MultiplicativeCosine):
        return eval_equilibrium(spec, v)
    if isinstance(pert, AdditiveBumpCosine):
        if not isinstance(spec, BumpOnTail):
            raise TypeError("additive bump perturbation requires a BumpOnTail equilibrium")
        return _bump_profile(spec, v)
    raise TypeError(f"unknown perturbation spec {pert!r}")


def perturbation_velocity_fourier(
    pert: PerturbationSpec, spec: EquilibriumSpec, m
) -> np.ndarray:
    """Transform of the perturbation's velocity factor at frequency m."""
    m = np.asarray(m, dtype=float)
    if isinstance(pert, MultiplicativeCosine):
        return equilibrium_velocity_fourier(spec, m)
    if isinstance(pert, AdditiveBumpCosine):
        if not isinstance(spec, BumpOnTail):
            raise TypeError("additive bump perturbation requires a BumpOnTail equilibrium")
        return 0.1 * np.exp(-1j * spec.v2 * m) * np.exp(-(m**2) / 8.0)
    raise TypeError(f"unknown perturbation spec {pert!r}")


def build_initial_condition(
    spec: EquilibriumSpec, pert: PerturbationSpec, grid: PhaseSpaceGrid
) -> DistributionState:
    """Sample the perturbed equilibrium on the grid."""
    if pert.mode >= grid.Mx // 2:
        raise AliasingError(
            f"perturbation mode {pert.mode} is not resolvable on {grid.Mx} spatial nodes"
        )
    x = grid.x_nodes()
    v = grid.v_nodes()
    feq = eval_equilibrium(spec, v)
    phase = np.cos(pert.mode * grid.k0 * x)
    if isinstance(pert, MultiplicativeCosine):
        values = (1.0 + pert.eps * phase)[:, None] * feq[None, :]
    elif isinstance(pert, AdditiveBumpCosine):
        values = feq[None, :] + pert.eps * phase[:, None] * _bump_profile(spec, v)[None, :]
    else:
        raise TypeError(f"unknown perturbation spec {pert!r}")
    return DistributionState(values=values, time=0.0)
