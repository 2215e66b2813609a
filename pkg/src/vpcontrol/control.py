"""Static external control fields parametrised by truncated Fourier series.

H(x; a, b) = sum_{k=1..N} a_k cos(k k0 x) + b_k sin(k k0 x)

There is no constant term, so every control field has zero spatial mean.
The packed parameter vector orders coefficients as (a_1..a_N, b_1..b_N).
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from vpcontrol.core import ConfigurationError


@dataclass(frozen=True)
class ControlField:
    a: np.ndarray  # cosine coefficients, length N
    b: np.ndarray  # sine coefficients, length N
    k0: float

    def __post_init__(self):
        object.__setattr__(self, "a", np.atleast_1d(np.asarray(self.a, dtype=float)))
        object.__setattr__(self, "b", np.atleast_1d(np.asarray(self.b, dtype=float)))
        if self.a.shape != self.b.shape or self.a.ndim != 1:
            raise ConfigurationError(
                f"coefficient arrays must be 1-d and equal length, got {self.a.shape} / {self.b.shape}"
            )

    @property
    def order(self) -> int:
        return self.a.size

    def to_dict(self) -> dict:
        return {"N": self.order, "k0": self.k0, "a": list(self.a), "b": list(self.b)}

    @staticmethod
    def from_dict(d: dict) -> "ControlField":
        f = ControlField(a=np.asarray(d["a"], dtype=float), b=np.asarray(d["b"], dtype=float), k0=float(d["k0"]))
        if f.order != int(d["N"]):
            raise ConfigurationError(f"declared N={d['N']} does not match {f.order} coefficients")
        return f


def zero_control(k0: float, order: int = 1) -> ControlField:
    n = max(int(order), 1)
    return ControlField(a=np.zeros(n), b=np.zeros(n), k0=k0)


def eval_control(field: ControlField, x) -> np.ndarray:
    """H(x) on an array of positions."""
    x = np.asarray(x, dtype=float)
    out = np.zeros_like(x)
    for k in range(1, field.order + 1):
        out = out + field.a[k - 1] * np.cos(k * field.k0 * x)
        out = out + field.b[k - 1] * np.sin(k * field.k0 * x)
    return out


def pack_params(field: ControlField) -> np.ndarray:
    """Flatten to (a_1..a_N, b_1..b_N)."""
    return np.concatenate([field.a, field.b])


def unpack_params(theta: np.ndarray, N: int, k0: float) -> ControlField:
    theta = np.asarray(theta, dtype=float)
    if theta.size != 2 * N:
        raise ConfigurationError(f"expected parameter vector of length {2 * N}, got {theta.size}")
    return ControlField(a=theta[:N].copy(), b=theta[N:].copy(), k0=k0)
