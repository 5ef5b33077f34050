"""Affine maps ``x -> V x + h`` between spatially indexed vectors.

``V`` is a banded Toeplitz matrix whose entries are Laurent series in ``z``;
it is stored as a dense ``(n_out, n_in, D)`` coefficient array with a common
``lag`` (``V[i, j, d]`` multiplies ``z**-(lag + d)``).
"""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Mapping

import numpy as np

from . import _accel
from .errors import AssemblyError
from .series import TRIM_TOL, ExtentVector, LaurentSeries, series

__all__ = ["AffineBlock", "AffineMapPair", "toeplitz_from_symbol", "toeplitz_from_kernel", "AssemblyError"]


def _trim_lag(V: np.ndarray, lag: int) -> tuple[np.ndarray, int]:
    if V.shape[2] == 0:
        return V, 0
    live = np.flatnonzero(np.any(np.abs(V) >= TRIM_TOL, axis=(0, 1)))
    if live.size == 0:
        return V[:, :, :0], 0
    return V[:, :, live[0]:live[-1] + 1], lag + int(live[0])


def toeplitz_from_symbol(symbol: Mapping[int, LaurentSeries], out_extent: int, in_extent: int) -> tuple[np.ndarray, int]:
    """Toeplitz matrix with ``V[i, j] = symbol[i - j]`` (sites, not row indices)."""
    live = {d: s for d, s in symbol.items() if not s.is_zero}
    if not live:
        return np.zeros((2 * out_extent + 1, 2 * in_extent + 1, 0)), 0
    lo = min(s.lag for s in live.values())
    D = max(s.max_delay for s in live.values()) - lo + 1
    V = np.zeros((2 * out_extent + 1, 2 * in_extent + 1, D))
    for j in range(-in_extent, in_extent + 1):
        for d, s in live.items():
            i = j + d
            if abs(i) > out_extent:
                raise AssemblyError(f"symbol offset {d} leaves output extent {out_extent}")
            V[i + out_extent, j + in_extent] = s.dense(lo, D)
    return V, lo


def toeplitz_from_kernel(kernel: ExtentVector, out_extent: int, in_extent: int) -> tuple[np.ndarray, int]:
    """Toeplitz matrix whose column ``j`` is ``kernel`` centred on site ``j``."""
    return toeplitz_from_symbol({k: kernel[k] for k in range(-kernel.extent, kernel.extent + 1)}, out_extent, in_extent)


@dataclass(frozen=True, eq=False)
class AffineBlock:
    """One block row ``q = V x + h`` of a stacked affine map."""

    name: str
    V: np.ndarray
    lag: int
    h: ExtentVector
    out_extent: int
    in_extent: int

    def __post_init__(self):
        V, lag = _trim_lag(np.asarray(self.V, dtype=float), int(self.lag))
        if V.shape[:2] != (2 * self.out_extent + 1, 2 * self.in_extent + 1):
            raise AssemblyError(f"block {self.name}: V shape {V.shape[:2]} does not match extents "
                                f"{self.out_extent} <- {self.in_extent}")
        if self.h.extent != self.out_extent:
            object.__setattr__(self, "h", self.h.pad(self.out_extent))
        V.setflags(write=False)
        object.__setattr__(self, "V", V)
        object.__setattr__(self, "lag", lag)

    def entry(self, i: int, j: int) -> LaurentSeries:
        """Entry at output site ``i`` and input site ``j``."""
        return series(self.V[i + self.out_extent, j + self.in_extent], self.lag)

    @property
    def is_causal(self) -> bool:
        return (self.lag >= 0 or self.V.shape[2] == 0) and self.h.is_causal

    def acausal_max(self) -> float:
        """Largest magnitude among coefficients of positive powers of ``z``."""
        worst = 0.0
        if self.lag < 0 and self.V.shape[2]:
            worst = float(np.max(np.abs(self.V[:, :, :min(-self.lag, self.V.shape[2])])))
        if self.h.lag < 0 and self.h.coeffs.shape[1]:
            worst = max(worst, float(np.max(np.abs(self.h.coeffs[:, :min(-self.h.lag, self.h.coeffs.shape[1])]))))
        return worst

    def causal_part(self, tol: float) -> "AffineBlock":
        """Drop positive-power coefficients no larger than ``tol``; raise otherwise."""
        worst = self.acausal_max()
        if worst > tol:
            raise AssemblyError(f"block {self.name}: acausal coefficient of magnitude {worst:.3g}")
        if self.is_causal:
            return self
        V = self.dense_V(0, max(self.lag + self.V.shape[2], 0))
        h = ExtentVector(self.h.dense(0, max(self.h.max_delay + 1, 0)))
        return AffineBlock(self.name, V, 0, h, self.out_extent, self.in_extent)

    def is_toeplitz(self, atol: float = 0.0) -> bool:
        V = self.V
        n_out, n_in, _ = V.shape
        for i in range(n_out - 1):
            for j in range(n_in - 1):
                if np.any(np.abs(V[i, j] - V[i + 1, j + 1]) > atol):
                    return False
        return True

    def dense_V(self, start: int, length: int) -> np.ndarray:
        D = self.V.shape[2]
        out = np.zeros(self.V.shape[:2] + (length,))
        lo = max(start, self.lag)
        hi = min(start + length, self.lag + D)
        if hi > lo:
            out[:, :, lo - start:hi - start] = self.V[:, :, lo - self.lag:hi - self.lag]
        return out

    def matvec(self, x: ExtentVector) -> ExtentVector:
        """``V x`` (without the offset)."""
        if x.extent != self.in_extent:
            x = x.pad(self.in_extent)
        width = x.coeffs.shape[1]
        D = self.V.shape[2]
        if width == 0 or D == 0:
            return ExtentVector.zeros(self.out_extent)
        out = _accel.apply_block(self.V, x.coeffs, D + width - 1)
        return ExtentVector(out, self.lag + x.lag)

    def apply(self, x: ExtentVector) -> ExtentVector:
        return self.matvec(x) + self.h


@dataclass(frozen=True, eq=False)
class AffineMapPair:
    """Stack of affine blocks sharing one input vector of the given extent."""

    blocks: tuple[AffineBlock, ...]
    input_extent: int
    param: str = ""
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        object.__setattr__(self, "blocks", tuple(self.blocks))
        for b in self.blocks:
            if b.in_extent != self.input_extent:
                raise AssemblyError(f"block {b.name} has input extent {b.in_extent}, expected {self.input_extent}")

    @property
    def names(self) -> tuple[str, ...]:
        return tuple(b.name for b in self.blocks)

    def __getitem__(self, name: str) -> AffineBlock:
        for b in self.blocks:
            if b.name == name:
                return b
        raise KeyError(name)

    @property
    def n_rows(self) -> int:
        return sum(2 * b.out_extent + 1 for b in self.blocks)

    @property
    def is_causal(self) -> bool:
        return all(b.is_causal for b in self.blocks)

    def apply(self, x: ExtentVector) -> dict[str, ExtentVector]:
        return {b.name: b.apply(x) for b in self.blocks}

    def offsets(self) -> dict[str, ExtentVector]:
        return {b.name: b.h for b in self.blocks}
