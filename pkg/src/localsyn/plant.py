"""The chain of coupled second-order subsystems and its banded spatial operator.

Each site ``k`` evolves as::

    x1[k, t+1] = beta * x1[k, t] + x2[k, t]
    x2[k, t+1] = alpha * (x2[k, t] + kappa * (x2[k-1, t] + x2[k+1, t])) + wu[k, t] + u[k, t]
    zeta[k, t] = (x1, x2, u)
    y[k, t]    = x1[k, t] + wy[k, t]

In spatial frequency the coupling becomes the scalar
``sigma(theta) = alpha * (1 + 2 kappa cos(theta))``.
"""
from __future__ import annotations

import math
import warnings
from dataclasses import dataclass

import numpy as np

from .series import ExtentVector, LaurentSeries, series

__all__ = [
    "PlantParams",
    "FIG3_PARAMS",
    "FrequencyPlant",
    "sigma_at",
    "sigma_kernel",
    "apply_sigma",
    "build_freq_plant",
    "z_minus_beta",
    "z_minus_sigma",
]


@dataclass(frozen=True)
class PlantParams:
    alpha: float
    beta: float
    kappa: float

    def __post_init__(self):
        for name in ("alpha", "beta", "kappa"):
            if not math.isfinite(getattr(self, name)):
                raise ValueError(f"{name} must be finite")

    def sigma(self, theta):
        return sigma_at(self, theta)

    def check(self) -> list[str]:
        """Open-loop stability warnings (informational only)."""
        msgs = []
        if abs(self.beta) >= 1:
            msgs.append(f"|beta| = {abs(self.beta):g} >= 1: first state is not open-loop stable")
        smax = abs(self.alpha) * (1 + 2 * abs(self.kappa))
        if smax >= 1:
            msgs.append(f"max |sigma| = {smax:g} >= 1: coupled state is not open-loop stable")
        for m in msgs:
            warnings.warn(m, stacklevel=2)
        return msgs


FIG3_PARAMS = PlantParams(alpha=1.5, beta=1.0, kappa=0.8)


def sigma_at(p: PlantParams, theta):
    return p.alpha * (1 + 2 * p.kappa * np.cos(theta))


def sigma_kernel(p: PlantParams) -> ExtentVector:
    """Index-domain kernel of sigma: ``{-1: a k, 0: a, +1: a k}``."""
    ak = p.alpha * p.kappa
    return ExtentVector(np.array([[ak], [p.alpha], [ak]]))


def apply_sigma(p: PlantParams, v: ExtentVector) -> ExtentVector:
    """Apply the coupling operator; the declared extent grows by one."""
    return sigma_kernel(p).convolve(v)


def z_minus_beta(p: PlantParams) -> ExtentVector:
    return ExtentVector(np.array([[1.0, -p.beta]]), lag=-1)


def z_minus_sigma(p: PlantParams) -> ExtentVector:
    ak = p.alpha * p.kappa
    return ExtentVector(np.array([[0.0, -ak], [1.0, -p.alpha], [0.0, -ak]]), lag=-1)


def z_minus(c) -> LaurentSeries:
    """The scalar series ``z - c``."""
    return series([1.0, -c], lag=-1)


@dataclass(frozen=True)
class FrequencyPlant:
    """State-space partition of the plant at one spatial frequency.

    State ``(x1, x2)``, disturbance ``(wy, wu)``, regulated output
    ``(x1, x2, u)``, measurement ``y = x1 + wy``.
    """

    theta: float
    A: np.ndarray
    B1: np.ndarray
    B2: np.ndarray
    C1: np.ndarray
    D12: np.ndarray
    C2: np.ndarray
    D21: np.ndarray


def build_freq_plant(p: PlantParams, theta: float) -> FrequencyPlant:
    s = float(sigma_at(p, theta))
    return FrequencyPlant(
        theta=theta,
        A=np.array([[p.beta, 1.0], [0.0, s]]),
        B1=np.array([[0.0, 0.0], [0.0, 1.0]]),
        B2=np.array([[0.0], [1.0]]),
        C1=np.array([[1.0, 0.0], [0.0, 1.0], [0.0, 0.0]]),
        D12=np.array([[0.0], [0.0], [1.0]]),
        C2=np.array([[1.0, 0.0]]),
        D21=np.array([[1.0, 0.0]]),
    )
