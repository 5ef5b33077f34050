"""Unconstrained optimal cost by per-frequency model matching.

At a fixed spatial frequency the chain is a scalar plant and the decision
variable is a single causal ``f(z)``. Each per-frequency problem is solved by
the same FIR least-squares routine as the finite-extent problems, then the
squared costs are averaged over a uniform grid in ``[0, 2 pi)`` (periodic
trapezoid rule). The integrand is even about ``theta = pi``, so only half the
grid is solved.

:func:`per_theta_cost_lqg` is an independent Riccati-based reference for the
same per-frequency quantity.
"""
from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass

import numpy as np
import scipy.linalg as sla

from .affine import AffineBlock, AffineMapPair
from .errors import ConfigError
from .model_match import SolverConfig, solve_finite_extent, thread_count
from .plant import PlantParams, build_freq_plant, sigma_at, z_minus
from .series import ExtentVector, LaurentSeries, series
from .sl_maps import CAUSAL_TOL

__all__ = ["OracleConfig", "theta_grid", "per_theta_pair", "per_theta_cost", "per_theta_cost_lqg",
           "integrand_table", "j_inf"]


@dataclass(frozen=True)
class OracleConfig:
    theta_points: int = 512
    oracle_T: int = 240

    def __post_init__(self):
        if int(self.theta_points) != self.theta_points or self.theta_points < 128:
            raise ConfigError(f"theta_points must be an integer >= 128, got {self.theta_points}")
        if int(self.oracle_T) != self.oracle_T or self.oracle_T < 4:
            raise ConfigError(f"oracle_T must be an integer >= 4, got {self.oracle_T}")


def theta_grid(n: int) -> np.ndarray:
    return 2 * np.pi * np.arange(n) / n


def _scalar_block(name: str, kernel: LaurentSeries, offset: LaurentSeries | None, g: LaurentSeries) -> AffineBlock:
    """Block ``q = kernel (g + z^-4 f) + offset`` as a 1x1 affine block in ``f``."""
    vk = kernel * series([1.0], 4)
    h = kernel * g
    if offset is not None:
        h = h + offset
    V = np.asarray(vk.coeffs, dtype=float).reshape(1, 1, -1)
    hv = ExtentVector(np.asarray(h.coeffs, dtype=float).reshape(1, -1), h.lag)
    return AffineBlock(name, V, vk.lag, hv, 0, 0)


def per_theta_pair(p: PlantParams, theta: float, which: str = "sl") -> AffineMapPair:
    """Scalar stacked model-matching problem at one spatial frequency."""
    s = float(sigma_at(p, theta))
    zs, zb = z_minus(s), z_minus(p.beta)
    g = series([1.0, s + p.beta], 2)
    one = series([1.0])
    if which == "sl":
        # n1, r12, n2, r22, l, m2 written with the SL formulas
        spec = [
            ("n1", zs * zb, -one),
            ("r12", one, None),
            ("n2", zs * zb * zb, -zb),
            ("r22", zb, None),
            ("l", zs * zs * zb * zb, -(zb * zs)),
            ("m2", zs * zb, -one),
        ]
    elif which == "io":
        gam = zb * zs
        spec = [
            ("gamma_m1", gam, -one),
            ("lambda", one, None),
            ("x2_wy", zb * gam, -zb),
            ("x2_wu", zb, None),
            ("psi", gam * gam, -gam),
            ("omega_m1", gam, -one),
        ]
    else:
        raise ConfigError(f"which must be sl or io, got {which!r}")
    tol = CAUSAL_TOL * max(1.0, abs(s), abs(p.beta)) ** 4
    blocks = tuple(_scalar_block(n, k, c, g).causal_part(tol) for n, k, c in spec)
    return AffineMapPair(blocks, 0, param=f"{which}-theta", meta={"theta": theta})


def per_theta_cost(p: PlantParams, theta: float, oracle_T: int = 240, which: str = "sl") -> float:
    """Squared optimal cost of the per-frequency problem (FIR horizon ``oracle_T``)."""
    res = solve_finite_extent(per_theta_pair(p, theta, which), SolverConfig(horizon_T=oracle_T, theta_grid=64))
    return res.J ** 2


def per_theta_cost_lqg(p: PlantParams, theta: float) -> float:
    """Squared optimal cost at one frequency from the two Riccati equations.

    Uses the current-estimator form of the output-feedback solution, which
    matches the direct term allowed by the causal (not strictly causal)
    controller class.
    """
    fp = build_freq_plant(p, theta)
    A, B1, B2, C1, D12, C2, D21 = fp.A, fp.B1, fp.B2, fp.C1, fp.D12, fp.C2, fp.D21
    X = sla.solve_discrete_are(A, B2, C1.T @ C1, np.eye(1))
    F = -np.linalg.solve(B2.T @ X @ B2 + 1.0, B2.T @ X @ A)
    Y = sla.solve_discrete_are(A.T, C2.T, B1 @ B1.T, np.eye(1))
    Lc = Y @ C2.T @ np.linalg.inv(C2 @ Y @ C2.T + 1.0)
    I2 = np.eye(2)
    Acl = np.block([[A + B2 @ F @ Lc @ C2, B2 @ F @ (I2 - Lc @ C2)],
                    [A @ Lc @ C2 + B2 @ F @ Lc @ C2, (A + B2 @ F) @ (I2 - Lc @ C2)]])
    Bcl = np.vstack([B1 + B2 @ F @ Lc @ D21, A @ Lc @ D21 + B2 @ F @ Lc @ D21])
    Ccl = np.hstack([C1 + D12 @ F @ Lc @ C2, D12 @ F @ (I2 - Lc @ C2)])
    Dcl = D12 @ F @ Lc @ D21
    W = sla.solve_discrete_lyapunov(Acl.T, Ccl.T @ Ccl)
    return float(np.trace(Dcl.T @ Dcl) + np.trace(Bcl.T @ W @ Bcl))


def integrand_table(p: PlantParams, cfg: OracleConfig | None = None, threads: int | None = None,
                    which: str = "sl") -> tuple[np.ndarray, np.ndarray]:
    """``(theta, squared cost)`` on the full uniform grid.

    Only ``0 <= theta <= pi`` is solved; the rest is filled by the symmetry
    ``sigma(theta) = sigma(2 pi - theta)``.
    """
    cfg = cfg or OracleConfig()
    n = int(cfg.theta_points)
    th = theta_grid(n)
    half = np.arange(n // 2 + 1)
    nthreads = min(thread_count(threads), len(half))

    def solve(i):
        return per_theta_cost(p, float(th[i]), cfg.oracle_T, which)

    if nthreads == 1:
        vals = [solve(i) for i in half]
    else:
        with ThreadPoolExecutor(max_workers=nthreads) as pool:
            vals = list(pool.map(solve, half))
    out = np.empty(n)
    out[half] = vals
    mirror = np.arange(n // 2 + 1, n)
    out[mirror] = out[n - mirror]
    return th, out


def j_inf(p: PlantParams, cfg: OracleConfig | None = None, threads: int | None = None, which: str = "sl") -> float:
    """Unconstrained optimal cost: root of the grid mean of the per-frequency squared costs."""
    _, vals = integrand_table(p, cfg, threads, which)
    return float(np.sqrt(np.mean(vals)))
