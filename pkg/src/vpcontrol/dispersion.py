"""Linear stability analysis and analytic synthesis of the control field.

For spatial mode k (physical wavenumber k*k0) the linearised density
perturbation obeys a Volterra equation whose Laplace transform gives the
dispersion relation

    1 + L[U(., k)](s) = 0,      U(t, k) = t * fhat_eq(k k0 t),

with L the one-sided Laplace transform.  Roots with positive real part
are exponentially growing modes; the fastest one, s0(k), is located by a
coarse scan of |1 + L[U]| over a rectangle in the s plane followed by
derivative-free refinement.  The static control that cancels the
fastest-growing contribution of the free-streaming source

    S(t, k) = (eps/2) * ghat(k k0 t)

has spectral amplitude proportional to s0 * L[S](s0) / (i k k0); the
overall sign is calibrated once against the solver's acceleration
convention (see below) and frozen.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Optional

import numpy as np
from scipy.optimize import minimize

from vpcontrol.control import ControlField
from vpcontrol.core import PhaseSpaceGrid
from vpcontrol.equilibria import (
    EquilibriumSpec,
    PerturbationSpec,
    equilibrium_velocity_fourier,
    perturbation_velocity_fourier,
)

# Fixed so the two-stream preset yields b1 < 0, the direction that
# suppresses growth under the solver's acceleration convention.
CALIBRATION_SIGN = -1.0

#: refined roots with |1 + L[U]| above this are rejected as numerical noise
RESIDUAL_THRESHOLD = 1e-2

_GL_ORDER = 16
_PANEL_LENGTH = 2.0
_DECAY_BOUND = 1e-16
_PANEL_TOL = 1e-10


class NoUnstableRoot(RuntimeError):
    """No dispersion root with positive real part was found (stable mode)."""


@dataclass(frozen=True)
class DispersionRoot:
    mode: int
    s0: complex
    residual: float


class _LaplaceKernel:
    """Composite Gauss-Legendre quadrature of int_0^inf e^{-st} g(t) dt.

    Nodes are fixed per kernel: the truncation point comes from the
    Gaussian decay of g, and the panel count is doubled until the result
    is stable to the panel tolerance, checked on probe frequencies.
    """

    def __init__(self, g, t_max: float, probes: np.ndarray):
        self._g = g
        n_panels = max(8, int(math.ceil(t_max / _PANEL_LENGTH)))
        t, w = _gl_nodes(t_max, n_panels)
        val = self._quad(probes, t, w)
        for _ in range(5):
            n_panels *= 2
            t2, w2 = _gl_nodes(t_max, n_panels)
            val2 = self._quad(probes, t2, w2)
            if np.max(np.abs(val2 - val)) < _PANEL_TOL * max(1.0, np.max(np.abs(val2))):
                break
            t, w, val = t2, w2, val2
        self._t = t2
        self._gw = self._g(t2) * w2

    def _quad(self, s: np.ndarray, t: np.ndarray, w: np.ndarray) -> np.ndarray:
        return np.exp(-np.outer(s, t)) @ (self._g(t) * w)

    def __call__(self, s) -> np.ndarray:
        s = np.atleast_1d(np.asarray(s, dtype=complex))
        out = np.empty(s.shape, dtype=complex)
        # chunk the frequency axis to bound the outer-product temporaries
        chunk = max(1, 2**22 // max(self._t.size, 1))
        for lo in range(0, s.size, chunk):
            block = s[lo : lo + chunk]
            out[lo : lo + chunk] = np.exp(-np.outer(block, self._t)) @ self._gw
        return out


def _gl_nodes(t_max: float, n_panels: int):
    # uniform panels, with the first one refined geometrically so the
    # e^{-Re(s) t} boundary layer stays resolved for large real s
    x, w = np.polynomial.legendre.leggauss(_GL_ORDER)
    uniform = np.linspace(0.0, t_max, n_panels + 1)
    graded = uniform[1] * 0.5 ** np.arange(10, 0, -1)
    edges = np.concatenate([[0.0], graded, uniform[1:]])
    half = 0.5 * np.diff(edges)
    mid = 0.5 * (edges[:-1] + edges[1:])
    nodes = (mid[:, None] + half[:, None] * x[None, :]).ravel()
    weights = (half[:, None] * w[None, :]).ravel()
    return nodes, weights


def _t_max_for(spec: EquilibriumSpec, k_phys: float) -> float:
    # grow t until |fhat_eq(k t)| * max(t, 1) falls below the decay bound;
    # the e^{-Re(s) t} factor only helps, so this covers all Re(s) >= 0
    t = 16.0
    while True:
        tail = abs(equilibrium_velocity_fourier(spec, np.array([k_phys * t]))[0]) * max(t, 1.0)
        if tail < _DECAY_BOUND:
            return t
        t *= 1.25


_PROBES = np.array([0.01 + 0.0j, 0.3 + 0.9j, 0.9 - 0.9j, 1.0 + 0.0j, 100.0 + 0.0j])


def laplace_U(spec: EquilibriumSpec, k_phys: float, s) -> np.ndarray:
    """L[U](s) with U(t) = t * fhat_eq(k_phys t); vectorised in s."""
    if k_phys == 0:
        raise ValueError("k_phys must be nonzero")
    kernel = _u_kernel(spec, k_phys)
    out = kernel(s)
    return out if np.ndim(s) else complex(out[0])


def _u_kernel(spec: EquilibriumSpec, k_phys: float) -> _LaplaceKernel:
    t_max = _t_max_for(spec, k_phys)
    return _LaplaceKernel(
        lambda t: t * equilibrium_velocity_fourier(spec, k_phys * t), t_max, _PROBES
    )


def laplace_S(
    spec: EquilibriumSpec, pert: PerturbationSpec, mode: int, grid: PhaseSpaceGrid, s
) -> np.ndarray:
    """Transform of the free-streaming source for the given spatial mode.

    The cosine perturbation carries Fourier-series weight eps/2 on modes
    +-pert.mode and nothing elsewhere.
    """
    if abs(mode) != pert.mode:
        out = np.zeros(np.shape(np.atleast_1d(s)), dtype=complex)
        return out if np.ndim(s) else 0j
    k_phys = mode * grid.k0
    t_max = _t_max_for(spec, k_phys)
    kernel = _LaplaceKernel(
        lambda t: perturbation_velocity_fourier(pert, spec, k_phys * t), t_max, _PROBES
    )
    out = 0.5 * pert.eps * kernel(s)
    return out if np.ndim(s) else complex(out[0])


def _grid_local_minima(mag: np.ndarray) -> list[tuple[int, int]]:
    """Indices of strict local minima of a 2-d surface (4-neighbour)."""
    hits = []
    interior = mag[1:-1, 1:-1]
    mask = (
        (interior < mag[:-2, 1:-1])
        & (interior < mag[2:, 1:-1])
        & (interior < mag[1:-1, :-2])
        & (interior < mag[1:-1, 2:])
    )
    for i, j in zip(*np.nonzero(mask)):
        hits.append((int(i) + 1, int(j) + 1))
    return hits


def find_root(
    spec: EquilibriumSpec,
    mode: int,
    grid: PhaseSpaceGrid,
    s_max: float = 1.0,
    omega_max: float = 1.0,
    coarse: int = 101,
    residual_threshold: float = RESIDUAL_THRESHOLD,
) -> DispersionRoot:
    """Fastest-growing dispersion root for the given spatial mode.

    Scans |1 + L[U]| over Re(s) in (0, s_max], Im(s) in [-omega_max,
    omega_max], refines every grid minimum with Nelder-Mead and returns
    the accepted root with the largest real part.  Raises
    :class:`NoUnstableRoot` when no refined minimum is a credible root.
    """
    if mode == 0:
        raise ValueError("mode must be nonzero")
    k_phys = mode * grid.k0
    kernel = _u_kernel(spec, k_phys)

    re = np.linspace(s_max / coarse, s_max, coarse)
    im = np.linspace(-omega_max, omega_max, coarse)
    S = re[:, None] + 1j * im[None, :]
    mag = np.abs(1.0 + kernel(S.ravel()).reshape(S.shape))

    candidates = _grid_local_minima(mag)
    gmin = np.unravel_index(int(np.argmin(mag)), mag.shape)
    if tuple(gmin) not in candidates:
        candidates.append(tuple(gmin))

    def objective(p):
        return abs(1.0 + kernel(complex(p[0], p[1]))[0]) ** 2

    roots: list[tuple[complex, float]] = []
    for i, j in candidates:
        start = [re[i], im[j]]
        res = minimize(
            objective,
            start,
            method="Nelder-Mead",
            options=dict(xatol=1e-12, fatol=1e-26, maxiter=2000, maxfev=4000),
        )
        s0 = complex(res.x[0], res.x[1])
        residual = math.sqrt(max(res.fun, 0.0))
        if s0.real <= 0 or residual >= residual_threshold:
            continue
        if any(abs(s0 - other) < 1e-6 for other, _ in roots):
            continue
        roots.append((s0, residual))

    if not roots:
        raise NoUnstableRoot(f"no unstable dispersion root for mode {mode}")

    def rank(item):
        s0, _ = item
        # largest growth first; ties prefer purely real, then smallest |Im|
        return (-s0.real, abs(s0.imag) > 1e-9, abs(s0.imag))

    s0, residual = min(roots, key=rank)
    return DispersionRoot(mode=mode, s0=s0, residual=residual)


def synthesize_guess(
    spec: EquilibriumSpec,
    pert: PerturbationSpec,
    grid: PhaseSpaceGrid,
    modes: Iterable[int],
    roots: Optional[dict[int, DispersionRoot]] = None,
) -> ControlField:
    """Control field cancelling the fastest-growing root of each mode.

    For every positive mode m the spectral amplitude is

        H_hat(m) = CALIBRATION_SIGN * s0(m) L[S(., m)](s0(m)) / (i m k0),

    and the conjugate pair (+-m) folds into real coefficients
    a_m = 2 Re H_hat(m), b_m = -2 Im H_hat(m).  Pre-computed roots may be
    passed to skip the scan.
    """
    mode_list = sorted({abs(int(m)) for m in modes})
    if not mode_list or mode_list[0] == 0:
        raise ValueError("modes must be nonzero integers")
    order = mode_list[-1]
    a = np.zeros(order)
    b = np.zeros(order)
    for m in mode_list:
        root = roots[m] if roots and m in roots else find_root(spec, m, grid)
        ls = laplace_S(spec, pert, m, grid, root.s0)
        h_hat = CALIBRATION_SIGN * root.s0 * ls / (1j * m * grid.k0)
        a[m - 1] = 2.0 * h_hat.real
        b[m - 1] = -2.0 * h_hat.imag
    return ControlField(a=a, b=b, k0=grid.k0)
