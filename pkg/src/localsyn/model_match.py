"""FIR model matching: minimize ``||V f + h||_2`` over causal FIR ``f``.

Convolution is linear in the impulse coefficients of ``f``, so with every entry
of ``f`` restricted to ``T + 1`` taps the problem is an ordinary linear least
squares problem in ``(2E + 1)(T + 1)`` unknowns. It is solved by a dense QR
factorization of the design matrix.
"""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Iterable, Sequence

import numpy as np
import scipy.linalg as sla

from . import _accel
from .affine import AffineMapPair
from .errors import ConfigError, LocalsynError, RankDeficiencyError
from .io_maps import assemble_io
from .plant import PlantParams
from .series import ExtentVector, h2_norm, h2_norm_freq
from .sl_maps import as_decision, assemble_sl

__all__ = [
    "SolverConfig",
    "SynthesisResult",
    "SweepRow",
    "HorizonReport",
    "design_system",
    "solve_finite_extent",
    "cost_of",
    "synthesize",
    "sweep",
    "horizon_convergence",
    "thread_count",
]

RANK_RTOL = 1e-10


@dataclass(frozen=True)
class SolverConfig:
    horizon_T: int = 60
    theta_grid: int = 512
    normal_eq_tol: float = 1e-9
    convergence_rtol: float = 1e-8

    def __post_init__(self):
        if int(self.horizon_T) != self.horizon_T or self.horizon_T < 1:
            raise ConfigError(f"horizon_T must be an integer >= 1, got {self.horizon_T}")
        if int(self.theta_grid) != self.theta_grid or self.theta_grid < 64:
            raise ConfigError(f"theta_grid must be an integer >= 64, got {self.theta_grid}")
        if not (self.normal_eq_tol > 0 and self.convergence_rtol > 0):
            raise ConfigError("tolerances must be positive")


@dataclass(frozen=True, eq=False)
class SynthesisResult:
    E: int
    f: np.ndarray
    J: float
    J_freq_check: float
    maps: dict
    residual_gradient_norm: float
    param: str = ""
    horizon_T: int = 0

    @property
    def f_vector(self) -> ExtentVector:
        return ExtentVector(self.f)

    @property
    def freq_rel_error(self) -> float:
        return abs(self.J - self.J_freq_check) / self.J if self.J > 0 else abs(self.J_freq_check)


@dataclass(frozen=True, eq=False)
class _Layout:
    name: str
    out_extent: int
    row_len: int


def design_system(pair: AffineMapPair, T: int) -> tuple[np.ndarray, np.ndarray, list[_Layout]]:
    """Design matrix ``A`` and offset ``b`` with ``A x + b`` the stacked residual.

    ``x`` holds the taps of ``f`` site by site (``x[j (T+1) + t]`` is the
    coefficient of ``z^-t`` at site ``j - E``). Each block contributes its
    output sites times a time window long enough to hold ``V f + h`` exactly.
    """
    if not pair.is_causal:
        raise ValueError("design_system needs a causal map")
    rows_A, rows_b, layout = [], [], []
    for b in pair.blocks:
        D = b.V.shape[2]
        row_len = max(b.lag + D + T if D else 0, b.h.max_delay + 1, 1)
        if D:
            V = b.dense_V(0, b.lag + D)
            rows_A.append(_accel.design_block(V, T, row_len))
        else:
            rows_A.append(np.zeros(((2 * b.out_extent + 1) * row_len, (2 * b.in_extent + 1) * (T + 1))))
        rows_b.append(b.h.dense(0, row_len).ravel())
        layout.append(_Layout(b.name, b.out_extent, row_len))
    return np.vstack(rows_A), np.concatenate(rows_b), layout


def _lstsq(A: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Minimize ``||A x + b||`` by economic QR; raises on numerical rank loss."""
    Q, R = sla.qr(A, mode="economic", check_finite=False)
    d = np.abs(np.diag(R))
    if d.size and d.min() <= RANK_RTOL * d.max():
        ratio = d.min() / d.max() if d.max() > 0 else 0.0
        raise RankDeficiencyError(
            f"design matrix is rank deficient (min/max |R_ii| = {ratio:.3g}); "
            "the z^-4 identity block should make it full rank")
    return sla.solve_triangular(R, -(Q.T @ b), check_finite=False)


def solve_finite_extent(pair: AffineMapPair, cfg: SolverConfig | None = None) -> SynthesisResult:
    cfg = cfg or SolverConfig()
    T = int(cfg.horizon_T)
    E = pair.input_extent
    A, b, _ = design_system(pair, T)
    if not np.any(b):
        x = np.zeros(A.shape[1])
    else:
        x = _lstsq(A, b)
    r = A @ x + b
    grad = float(np.linalg.norm(A.T @ r))
    f = x.reshape(2 * E + 1, T + 1)
    maps = pair.apply(ExtentVector(f))
    J = float(np.linalg.norm(r))
    J_freq = h2_norm_freq(maps.values(), cfg.theta_grid)
    return SynthesisResult(E=E, f=f, J=J, J_freq_check=J_freq, maps=maps,
                           residual_gradient_norm=grad, param=pair.param, horizon_T=T)


def cost_of(pair: AffineMapPair, f) -> float:
    """``||V f + h||_2`` by explicit convolution."""
    f = as_decision(f, pair.input_extent)
    return h2_norm(pair.apply(f).values())


def _assemble(p: PlantParams, E: int, which: str) -> AffineMapPair:
    if which == "sl":
        return assemble_sl(p, E)
    if which == "io":
        return assemble_io(p, E)
    raise ConfigError(f"unknown parameterization {which!r}")


def synthesize(p: PlantParams, E: int, cfg: SolverConfig | None = None, which: str = "sl") -> SynthesisResult:
    return solve_finite_extent(_assemble(p, E, which), cfg)


# ---------------------------------------------------------------------------
# sweep over E
# ---------------------------------------------------------------------------

def thread_count(threads: int | None = None) -> int:
    if threads is None:
        env = os.environ.get("LOCALSYN_THREADS", "").strip()
        if env:
            try:
                threads = int(env)
            except ValueError as exc:
                raise ConfigError(f"LOCALSYN_THREADS must be an integer, got {env!r}") from exc
        else:
            threads = os.cpu_count() or 1
    if threads < 1:
        raise ConfigError("thread count must be >= 1")
    return threads


@dataclass(frozen=True, eq=False)
class SweepRow:
    E: int
    J_sl: float = math.nan
    J_io: float = math.nan
    J_inf: float = math.nan
    T_used: int = 0
    residual_grad: float = math.nan
    status: str = "ok"
    results: dict = field(default_factory=dict)

    @property
    def gap_sl(self) -> float:
        return self.J_sl - self.J_inf

    @property
    def gap_io(self) -> float:
        return self.J_io - self.J_inf


def _sweep_row(p: PlantParams, E: int, cfg: SolverConfig, kinds: Sequence[str], J_inf: float) -> SweepRow:
    results, errors = {}, []
    for which in kinds:
        try:
            results[which] = synthesize(p, E, cfg, which)
        except LocalsynError as exc:
            errors.append(f"{which}: {type(exc).__name__}: {exc}")
    grads = [r.residual_gradient_norm for r in results.values()]
    status = "ok" if not errors else "; ".join(errors)
    if not errors and any(g > cfg.normal_eq_tol for g in grads):
        status = "warn: normal equations residual above tolerance"
    if not errors and len(results) == 2:
        a, b = results["sl"].J, results["io"].J
        if abs(a - b) > cfg.convergence_rtol * max(a, b):
            status = "warn: SL and IO costs differ"
    return SweepRow(
        E=E,
        J_sl=results["sl"].J if "sl" in results else math.nan,
        J_io=results["io"].J if "io" in results else math.nan,
        J_inf=J_inf,
        T_used=cfg.horizon_T,
        residual_grad=max(grads) if grads else math.nan,
        status=status,
        results=results,
    )


def sweep(p: PlantParams, E_list: Iterable[int], cfg: SolverConfig | None = None, which: str = "both",
          oracle_cfg=None, threads: int | None = None) -> list[SweepRow]:
    """Solve for every ``E`` in ``E_list``; rows are returned sorted by ``E``.

    ``oracle_cfg`` (an :class:`localsyn.oracle.OracleConfig`) adds the
    unconstrained optimum as a reference column. Rows are solved in a thread
    pool capped by ``threads`` or ``LOCALSYN_THREADS``.
    """
    cfg = cfg or SolverConfig()
    E_list = sorted(set(int(e) for e in E_list))
    if not E_list:
        raise ConfigError("E list is empty")
    if E_list[0] < 0:
        raise ConfigError("E values must be nonnegative")
    kinds = {"sl": ("sl",), "io": ("io",), "both": ("sl", "io")}.get(which)
    if kinds is None:
        raise ConfigError(f"which must be sl, io or both, got {which!r}")
    J_inf = math.nan
    if oracle_cfg is not None:
        from .oracle import j_inf

        if oracle_cfg.oracle_T < 4 * cfg.horizon_T:
            raise ConfigError(f"oracle_T={oracle_cfg.oracle_T} must be at least 4x horizon_T={cfg.horizon_T}")
        J_inf = j_inf(p, oracle_cfg, threads=threads)
    n = min(thread_count(threads), len(E_list))
    if n == 1:
        return [_sweep_row(p, E, cfg, kinds, J_inf) for E in E_list]
    with ThreadPoolExecutor(max_workers=n) as pool:
        return list(pool.map(lambda E: _sweep_row(p, E, cfg, kinds, J_inf), E_list))


# ---------------------------------------------------------------------------
# horizon convergence
# ---------------------------------------------------------------------------

@dataclass(frozen=True)
class HorizonReport:
    T: tuple[int, ...]
    J: tuple[float, ...]

    @property
    def nonincreasing(self) -> bool:
        return all(b <= a + 1e-12 * max(a, 1.0) for a, b in zip(self.J, self.J[1:]))

    @property
    def last_rel_change(self) -> float:
        if len(self.J) < 2:
            return math.nan
        a, b = self.J[-2], self.J[-1]
        return abs(a - b) / a if a > 0 else abs(a - b)


def horizon_convergence(pair: AffineMapPair, T_list: Sequence[int], cfg: SolverConfig | None = None) -> HorizonReport:
    T_list = [int(t) for t in T_list]
    if any(b <= a for a, b in zip(T_list, T_list[1:])):
        raise ConfigError("T_list must be strictly increasing")
    base = cfg or SolverConfig()
    Js = []
    for T in T_list:
        c = SolverConfig(T, base.theta_grid, base.normal_eq_tol, base.convergence_rtol)
        Js.append(solve_finite_extent(pair, c).J)
    return HorizonReport(tuple(T_list), tuple(Js))
