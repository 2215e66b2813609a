"""Gradient-based refinement of control parameters.

Gradients are central finite differences over the packed coefficient
vector (masked entries stay fixed at zero gradient), so the forward
solver needs no differentiable-programming machinery.  Two drivers are
provided: plain gradient descent with a constant stepsize, and gradient
descent with a strong-Wolfe line search (bracket then zoom).
"""

from __future__ import annotations

import time
from concurrent.futures import Executor
from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from vpcontrol.control import unpack_params
from vpcontrol.core import ConfigurationError, SimulationConfig
from vpcontrol.objectives import OBJECTIVE_FAILURE, ObjectiveKind, evaluate_objective


class GradientFailure(RuntimeError):
    def __init__(self, index: int):
        super().__init__(f"objective evaluation failed while perturbing parameter {index}")
        self.index = index


class LineSearchFailure(RuntimeError):
    pass


@dataclass
class ObjectiveEvaluator:
    """Picklable map from a packed parameter vector to an objective value."""

    kind: ObjectiveKind
    base_config: SimulationConfig
    order: int

    def __call__(self, theta: np.ndarray) -> float:
        control = unpack_params(np.asarray(theta, dtype=float), self.order, self.base_config.grid.k0)
        return evaluate_objective(self.kind, self.base_config.with_control(control))


@dataclass
class OptimizerConfig:
    init: np.ndarray
    method: str = "constant"  # "constant" | "wolfe"
    mask: Optional[np.ndarray] = None  # True = free parameter; None = all free
    stepsize: float = 1e-8
    c1: float = 1e-4
    c2: float = 0.9
    max_iters: int = 200
    fd_step: float = 1e-6
    grad_tol: float = 0.0
    f_tol: float = 0.0

    def __post_init__(self):
        self.init = np.asarray(self.init, dtype=float)
        if self.mask is not None:
            self.mask = np.asarray(self.mask, dtype=bool)
            if self.mask.shape != self.init.shape:
                raise ConfigurationError("mask and init must have the same shape")
        if not (0.0 < self.c1 < self.c2 < 1.0):
            raise ConfigurationError(f"need 0 < c1 < c2 < 1, got c1={self.c1}, c2={self.c2}")
        if self.stepsize <= 0 or self.fd_step <= 0:
            raise ConfigurationError("stepsize and fd_step must be positive")
        if self.method not in ("constant", "wolfe"):
            raise ConfigurationError(f"unknown method {self.method!r}")


@dataclass
class WolfeStepInfo:
    """Everything needed to re-check the accepted step a posteriori."""

    alpha: float
    phi0: float
    dphi0: float
    phi_alpha: float
    dphi_alpha: float
    satisfied: bool
    warning: str = ""


@dataclass
class OptimizationHistory:
    params: list = field(default_factory=list)  # iterate vectors
    objectives: list = field(default_factory=list)
    grad_norms: list = field(default_factory=list)
    steps: list = field(default_factory=list)  # step length leaving each iterate
    wall_times: list = field(default_factory=list)
    wolfe_info: list = field(default_factory=list)  # WolfeStepInfo per accepted step
    status: str = "running"
    warnings: list = field(default_factory=list)

    @property
    def final_params(self) -> np.ndarray:
        return np.asarray(self.params[-1], dtype=float)

    @property
    def n_iterations(self) -> int:
        return len(self.params) - 1

    def to_summary(self) -> dict:
        return {
            "status": self.status,
            "iterations": self.n_iterations,
            "final_objective": self.objectives[-1],
            "final_params": list(self.final_params),
            "wall_time": self.wall_times[-1] if self.wall_times else 0.0,
            "warnings": list(self.warnings),
        }


def fd_gradient(
    objective: Callable[[np.ndarray], float],
    theta: np.ndarray,
    fd_step: float,
    mask: Optional[np.ndarray] = None,
    executor: Optional[Executor] = None,
) -> np.ndarray:
    """Central-difference gradient; masked entries are exactly zero."""
    theta = np.asarray(theta, dtype=float)
    free = np.flatnonzero(mask) if mask is not None else np.arange(theta.size)
    points = []
    for i in free:
        for sign in (+1.0, -1.0):
            p = theta.copy()
            p[i] += sign * fd_step
            points.append(p)
    if executor is not None and len(points) > 1:
        values = list(executor.map(objective, points))
    else:
        values = [objective(p) for p in points]
    grad = np.zeros_like(theta)
    for j, i in enumerate(free):
        plus, minus = values[2 * j], values[2 * j + 1]
        if plus >= OBJECTIVE_FAILURE or minus >= OBJECTIVE_FAILURE:
            raise GradientFailure(int(i))
        grad[i] = (plus - minus) / (2.0 * fd_step)
    return grad


def wolfe_line_search(
    phi: Callable[[float], float],
    dphi: Callable[[float], float],
    c1: float = 1e-4,
    c2: float = 0.9,
    alpha_init: float = 1.0,
    expansion: float = 2.0,
    max_expansions: int = 12,
    max_zoom: int = 30,
) -> WolfeStepInfo:
    """Strong-Wolfe step selection by bracketing and bisection zoom.

    Returns the accepted step together with the quantities needed to
    verify both inequalities.  If no bracket is found within the
    expansion budget, the best sufficient-decrease step is returned with
    a warning; if not even sufficient decrease is achievable the search
    fails.
    """
    phi0 = phi(0.0)
    dphi0 = dphi(0.0)
    if dphi0 >= 0:
        raise LineSearchFailure(f"not a descent direction (phi'(0) = {dphi0:.3e})")

    def sufficient(alpha, value):
        return value <= phi0 + c1 * alpha * dphi0

    def curvature(dval):
        return abs(dval) <= c2 * abs(dphi0)

    def result(alpha, value, dval, warning=""):
        return WolfeStepInfo(
            alpha=alpha,
            phi0=phi0,
            dphi0=dphi0,
            phi_alpha=value,
            dphi_alpha=dval,
            satisfied=sufficient(alpha, value) and curvature(dval),
            warning=warning,
        )

    def zoom(lo, phi_lo, hi):
        # invariant: lo satisfies sufficient decrease and the acceptable
        # interval lies between lo and hi
        best = None
        for _ in range(max_zoom):
            alpha = 0.5 * (lo + hi)
            value = phi(alpha)
            if not sufficient(alpha, value) or value >= phi_lo:
                hi = alpha
                continue
            dval = dphi(alpha)
            if curvature(dval):
                return result(alpha, value, dval)
            best = (alpha, value, dval)
            if dval * (hi - lo) >= 0:
                hi = lo
            lo, phi_lo = alpha, value
        if best is not None:
            return result(*best, warning="zoom budget exhausted")
        if lo > 0 and sufficient(lo, phi_lo):
            return result(lo, phi_lo, dphi(lo), warning="zoom budget exhausted")
        raise LineSearchFailure("zoom failed to find a sufficient-decrease step")

    alpha_prev, phi_prev = 0.0, phi0
    alpha = alpha_init
    best_sd = None
    for i in range(max_expansions):
        value = phi(alpha)
        if not sufficient(alpha, value) or (i > 0 and value >= phi_prev):
            return zoom(alpha_prev, phi_prev, alpha)
        dval = dphi(alpha)
        best_sd = (alpha, value, dval)
        if curvature(dval):
            return result(alpha, value, dval)
        if dval >= 0:
            return zoom(alpha, value, alpha_prev)
        alpha_prev, phi_prev = alpha, value
        alpha *= expansion
    if best_sd is not None:
        return result(*best_sd, warning="bracket expansion budget exhausted")
    raise LineSearchFailure("no sufficient decrease within the expansion budget")


def _descend(
    objective: Callable[[np.ndarray], float],
    config: OptimizerConfig,
    take_step: Callable,
    hist: OptimizationHistory,
    executor: Optional[Executor],
) -> OptimizationHistory:
    theta = config.init.copy()
    t0 = time.perf_counter()
    value = objective(theta)
    hist.params.append(theta.copy())
    hist.objectives.append(value)
    hist.wall_times.append(time.perf_counter() - t0)
    for _ in range(config.max_iters):
        try:
            grad = fd_gradient(objective, theta, config.fd_step, config.mask, executor)
        except GradientFailure as err:
            hist.status = f"gradient_failure:{err.index}"
            hist.warnings.append(str(err))
            return hist
        gnorm = float(np.linalg.norm(grad))
        hist.grad_norms.append(gnorm)
        if gnorm <= config.grad_tol:
            hist.status = "grad_tol"
            return hist
        try:
            theta_new, step_len, value_new = take_step(theta, grad, value, hist)
        except LineSearchFailure as err:
            hist.status = "line_search_failure"
            hist.warnings.append(str(err))
            return hist
        hist.steps.append(step_len)
        theta = theta_new
        prev, value = value, value_new
        hist.params.append(theta.copy())
        hist.objectives.append(value)
        hist.wall_times.append(time.perf_counter() - t0)
        if abs(prev - value) <= config.f_tol:
            hist.status = "f_tol"
            return hist
    hist.status = "max_iters"
    return hist


def gd_constant(
    objective: Callable[[np.ndarray], float],
    config: OptimizerConfig,
    executor: Optional[Executor] = None,
) -> OptimizationHistory:
    """theta <- theta - stepsize * grad, run to budget or tolerance."""

    def take_step(theta, grad, _value, _hist):
        theta_new = theta - config.stepsize * grad
        return theta_new, config.stepsize, objective(theta_new)

    return _descend(objective, config, take_step, OptimizationHistory(), executor)


def gd_wolfe(
    objective: Callable[[np.ndarray], float],
    config: OptimizerConfig,
    executor: Optional[Executor] = None,
) -> OptimizationHistory:
    """Steepest descent with a strong-Wolfe line search along -grad."""

    def take_step(theta, grad, value, hist):
        direction = -grad
        dnorm = float(np.linalg.norm(direction))
        # central-difference directional derivative; offset scaled so the
        # parameter-space displacement stays ~fd_step
        h = config.fd_step / max(dnorm, 1.0)

        def phi(alpha):
            if alpha == 0.0:
                return value
            return objective(theta + alpha * direction)

        def dphi(alpha):
            return (phi(alpha + h) - phi(alpha - h)) / (2.0 * h)

        alpha_init = min(1.0, 1.0 / max(dnorm, 1e-16))
        info = wolfe_line_search(phi, dphi, c1=config.c1, c2=config.c2, alpha_init=alpha_init)
        hist.wolfe_info.append(info)
        if info.warning:
            hist.warnings.append(f"iteration {len(hist.params) - 1}: {info.warning}")
        theta_new = theta + info.alpha * direction
        return theta_new, info.alpha * dnorm, phi(info.alpha)

    return _descend(objective, config, take_step, OptimizationHistory(), executor)
