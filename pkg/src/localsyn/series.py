"""Scalar transfer-function series and spatially indexed vectors of them.

A series is stored densely over its occupied window of exponents:
``coeffs[i]`` multiplies ``z**-(lag + i)``. A negative ``lag`` therefore means
the series carries strictly positive powers of ``z`` (it is acausal). All maps
in this package are short polynomials in ``z`` and ``z**-1``, so no rational
(pole) bookkeeping is needed.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from . import _accel

TRIM_TOL = 1e-14

__all__ = [
    "TRIM_TOL",
    "LaurentSeries",
    "CausalSeries",
    "ExtentVector",
    "series",
    "series_add",
    "series_mul",
    "causal_check",
    "h2_norm",
    "h2_norm_freq",
    "spatial_eval",
]


def _as_coeff_array(coeffs) -> np.ndarray:
    arr = np.array(coeffs, copy=True)
    if arr.ndim == 0:
        arr = arr.reshape(1)
    if arr.dtype.kind in "iub" or arr.size == 0:
        arr = arr.astype(float)
    return arr


def _trim_1d(arr: np.ndarray, lag: int) -> tuple[np.ndarray, int]:
    nz = np.flatnonzero(np.abs(arr) >= TRIM_TOL)
    if nz.size == 0:
        return arr[:0], 0
    return arr[nz[0]:nz[-1] + 1], lag + int(nz[0])


@dataclass(frozen=True, eq=False)
class LaurentSeries:
    """Finite Laurent series ``sum_i coeffs[i] * z**-(lag + i)``."""

    coeffs: np.ndarray
    lag: int = 0

    def __post_init__(self):
        arr, lag = _trim_1d(_as_coeff_array(self.coeffs), int(self.lag))
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "lag", lag)

    # construction helpers -------------------------------------------------
    @classmethod
    def from_powers(cls, terms: Mapping[int, complex]) -> "LaurentSeries":
        """Build from ``{power_of_z: coefficient}``."""
        if not terms:
            return series([])
        lo = -max(terms)
        hi = -min(terms)
        arr = np.zeros(hi - lo + 1, dtype=np.result_type(*[type(v) for v in terms.values()], float))
        for p, c in terms.items():
            arr[-p - lo] += c
        return series(arr, lo)

    # inspection -------------------------------------------------------------
    @property
    def is_zero(self) -> bool:
        return self.coeffs.size == 0

    @property
    def max_delay(self) -> int:
        """Largest power of ``z**-1`` present (``-1`` for the zero series)."""
        return self.lag + self.coeffs.size - 1 if self.coeffs.size else -1

    @property
    def is_causal(self) -> bool:
        return self.lag >= 0

    def coeff(self, delay: int) -> complex:
        i = delay - self.lag
        if 0 <= i < self.coeffs.size:
            return self.coeffs[i]
        return 0.0

    def acausal_part(self) -> list[tuple[int, complex]]:
        """``(power, coefficient)`` pairs for every strictly positive power of ``z``."""
        return [(-(self.lag + i), c) for i, c in enumerate(self.coeffs) if self.lag + i < 0]

    def terms(self) -> list[tuple[int, float]]:
        """``(power_of_z, coefficient)`` pairs, highest power first, zeros skipped."""
        return [(-(self.lag + i), c) for i, c in enumerate(self.coeffs) if c != 0]

    def dense(self, start: int, length: int) -> np.ndarray:
        """Coefficients of delays ``start .. start+length-1`` (zero-filled)."""
        out = np.zeros(length, dtype=self.coeffs.dtype if self.coeffs.size else float)
        lo = max(start, self.lag)
        hi = min(start + length, self.lag + self.coeffs.size)
        if hi > lo:
            out[lo - start:hi - start] = self.coeffs[lo - self.lag:hi - self.lag]
        return out

    def __call__(self, z):
        """Evaluate at a (complex) point ``z``."""
        z = np.asarray(z, dtype=complex)
        powers = -(self.lag + np.arange(self.coeffs.size))
        return np.sum(self.coeffs * z[..., None] ** powers, axis=-1)

    def to_causal(self, tol: float = 0.0) -> "CausalSeries":
        """Drop acausal terms of magnitude ``<= tol``; raise if any larger remain."""
        bad = [(p, c) for p, c in self.acausal_part() if abs(c) > tol]
        if bad:
            raise ValueError(f"series has acausal terms {bad}")
        if self.lag >= 0:
            return CausalSeries(self.coeffs, self.lag)
        return CausalSeries(self.coeffs[-self.lag:], 0)

    def allclose(self, other: "LaurentSeries", atol: float = 1e-12) -> bool:
        lo = min(self.lag, other.lag)
        hi = max(self.max_delay, other.max_delay)
        n = max(hi - lo + 1, 0)
        return bool(np.all(np.abs(self.dense(lo, n) - other.dense(lo, n)) <= atol))

    # arithmetic -------------------------------------------------------------
    def __add__(self, other):
        other = _coerce(other)
        if self.is_zero:
            return other
        if other.is_zero:
            return self
        lo = min(self.lag, other.lag)
        n = max(self.max_delay, other.max_delay) - lo + 1
        return series(self.dense(lo, n) + other.dense(lo, n), lo)

    __radd__ = __add__

    def __neg__(self):
        return series(-self.coeffs, self.lag)

    def __sub__(self, other):
        return self + (-_coerce(other))

    def __rsub__(self, other):
        return _coerce(other) - self

    def __mul__(self, other):
        if np.isscalar(other):
            return series(self.coeffs * other, self.lag)
        other = _coerce(other)
        if self.is_zero or other.is_zero:
            return series([])
        return series(np.convolve(self.coeffs, other.coeffs), self.lag + other.lag)

    __rmul__ = __mul__

    def __pow__(self, n: int):
        out = series([1.0])
        for _ in range(n):
            out = out * self
        return out

    def __repr__(self):
        if self.is_zero:
            return f"{type(self).__name__}(0)"
        body = " + ".join(f"{c:.6g}*z^{p}" for p, c in self.terms())
        return f"{type(self).__name__}({body})"


class CausalSeries(LaurentSeries):
    """A :class:`LaurentSeries` with no strictly positive powers of ``z``.

    ``CausalSeries([c0, c1, ...])`` is ``c0 + c1 z^-1 + ...``.
    """

    def __post_init__(self):
        super().__post_init__()
        if self.lag < 0:
            raise ValueError("CausalSeries cannot carry positive powers of z; use LaurentSeries.to_causal")


def series(coeffs, lag: int = 0) -> LaurentSeries:
    """Canonical constructor: a :class:`CausalSeries` whenever the result is causal."""
    s = LaurentSeries(coeffs, lag)
    if s.lag >= 0:
        return CausalSeries(s.coeffs, s.lag)
    return s


def _coerce(x) -> LaurentSeries:
    if isinstance(x, LaurentSeries):
        return x
    if np.isscalar(x):
        return series([x])
    raise TypeError(f"cannot treat {type(x).__name__} as a series")


def series_add(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a + b


def series_mul(a: LaurentSeries, b: LaurentSeries) -> LaurentSeries:
    return a * b


def causal_check(a: LaurentSeries, tol: float = 1e-12) -> tuple[bool, list[tuple[int, complex]]]:
    """Causality test.

    Returns ``(ok, offenders)`` where ``offenders`` lists ``(power, coeff)``
    for strictly positive powers of ``z`` whose magnitude exceeds ``tol``.
    """
    bad = [(p, c) for p, c in a.acausal_part() if abs(c) > tol]
    return not bad, bad


# ---------------------------------------------------------------------------
# spatially indexed vectors
# ---------------------------------------------------------------------------

def _trim_cols(arr: np.ndarray, lag: int) -> tuple[np.ndarray, int]:
    if arr.shape[1] == 0:
        return arr, 0
    mask = np.any(np.abs(arr) >= TRIM_TOL, axis=0)
    nz = np.flatnonzero(mask)
    if nz.size == 0:
        return arr[:, :0], 0
    return arr[:, nz[0]:nz[-1] + 1], lag + int(nz[0])


@dataclass(frozen=True, eq=False)
class ExtentVector:
    """Column of series indexed by spatial offset ``k = -extent .. extent``.

    ``coeffs[k + extent, i]`` multiplies ``z**-(lag + i)`` at site ``k``. The
    declared extent is kept as given (blocks are deliberately zero-padded);
    :meth:`ext` reports the measured one.
    """

    coeffs: np.ndarray
    lag: int = 0

    def __post_init__(self):
        arr = np.array(self.coeffs, copy=True)
        if arr.ndim == 1:
            arr = arr.reshape(1, -1)
        if arr.ndim != 2 or arr.shape[0] % 2 != 1:
            raise ValueError(f"ExtentVector needs an odd number of rows, got shape {arr.shape}")
        if arr.dtype.kind in "iub" or arr.size == 0:
            arr = arr.astype(float)
        arr, lag = _trim_cols(arr, int(self.lag))
        arr.setflags(write=False)
        object.__setattr__(self, "coeffs", arr)
        object.__setattr__(self, "lag", lag)

    @classmethod
    def zeros(cls, extent: int) -> "ExtentVector":
        return cls(np.zeros((2 * extent + 1, 0)))

    @classmethod
    def delta(cls, extent: int = 0, site: int = 0, value: LaurentSeries | float = 1.0) -> "ExtentVector":
        return cls.from_entries({site: value}, extent)

    @classmethod
    def from_entries(cls, entries: Mapping[int, LaurentSeries | float] | Sequence, extent: int | None = None) -> "ExtentVector":
        """From ``{site: series}`` (or a full centered sequence of series)."""
        if not isinstance(entries, Mapping):
            entries = list(entries)
            e = (len(entries) - 1) // 2
            entries = {k - e: s for k, s in enumerate(entries)}
        entries = {k: _coerce(v) for k, v in entries.items()}
        if extent is None:
            extent = max((abs(k) for k in entries), default=0)
        live = [s for s in entries.values() if not s.is_zero]
        if not live:
            return cls.zeros(extent)
        lo = min(s.lag for s in live)
        n = max(s.max_delay for s in live) - lo + 1
        dtype = np.result_type(*[s.coeffs.dtype for s in live])
        arr = np.zeros((2 * extent + 1, n), dtype=dtype)
        for k, s in entries.items():
            if abs(k) > extent:
                raise ValueError(f"site {k} outside extent {extent}")
            arr[k + extent] = s.dense(lo, n)
        return cls(arr, lo)

    @property
    def extent(self) -> int:
        return (self.coeffs.shape[0] - 1) // 2

    @property
    def max_delay(self) -> int:
        return self.lag + self.coeffs.shape[1] - 1

    @property
    def is_causal(self) -> bool:
        return self.lag >= 0 or self.coeffs.shape[1] == 0

    def __getitem__(self, k: int) -> LaurentSeries:
        if abs(k) > self.extent:
            return series([])
        return series(self.coeffs[k + self.extent], self.lag)

    @property
    def entries(self) -> tuple[LaurentSeries, ...]:
        return tuple(self[k] for k in range(-self.extent, self.extent + 1))

    def ext(self, tol: float = 0.0) -> int:
        """Measured extent: largest ``|k|`` with an entry above ``tol`` (``-1`` if zero)."""
        rows = np.flatnonzero(np.any(np.abs(self.coeffs) > tol, axis=1))
        if rows.size == 0:
            return -1
        return int(np.max(np.abs(rows - self.extent)))

    def dense(self, start: int, length: int) -> np.ndarray:
        out = np.zeros((self.coeffs.shape[0], length), dtype=self.coeffs.dtype)
        lo = max(start, self.lag)
        hi = min(start + length, self.lag + self.coeffs.shape[1])
        if hi > lo:
            out[:, lo - start:hi - start] = self.coeffs[:, lo - self.lag:hi - self.lag]
        return out

    def pad(self, extent: int) -> "ExtentVector":
        """Re-declare with a larger extent (zero rows added symmetrically)."""
        e = self.extent
        if extent < e:
            if self.ext() > extent:
                raise ValueError(f"cannot shrink to extent {extent}: measured extent is {self.ext()}")
            return ExtentVector(self.coeffs[e - extent:e + extent + 1], self.lag)
        extra = extent - e
        return ExtentVector(np.pad(self.coeffs, ((extra, extra), (0, 0))), self.lag)

    def trimmed(self) -> "ExtentVector":
        return self.pad(max(self.ext(), 0))

    def shift_time(self, delay: int) -> "ExtentVector":
        """Multiply every entry by ``z**-delay``."""
        return ExtentVector(self.coeffs, self.lag + delay)

    def allclose(self, other: "ExtentVector", atol: float = 1e-12) -> bool:
        e = max(self.extent, other.extent)
        a, b = self.pad(e), other.pad(e)
        lo = min(a.lag, b.lag)
        n = max(a.max_delay, b.max_delay) - lo + 1
        if n <= 0:
            return True
        return bool(np.all(np.abs(a.dense(lo, n) - b.dense(lo, n)) <= atol))

    def max_abs_diff(self, other: "ExtentVector") -> float:
        e = max(self.extent, other.extent)
        a, b = self.pad(e), other.pad(e)
        lo = min(a.lag, b.lag)
        n = max(a.max_delay, b.max_delay) - lo + 1
        if n <= 0:
            return 0.0
        return float(np.max(np.abs(a.dense(lo, n) - b.dense(lo, n)), initial=0.0))

    # arithmetic -------------------------------------------------------------
    def __add__(self, other: "ExtentVector") -> "ExtentVector":
        e = max(self.extent, other.extent)
        a, b = self.pad(e), other.pad(e)
        if a.coeffs.shape[1] == 0:
            return b
        if b.coeffs.shape[1] == 0:
            return a
        lo = min(a.lag, b.lag)
        n = max(a.max_delay, b.max_delay) - lo + 1
        return ExtentVector(a.dense(lo, n) + b.dense(lo, n), lo)

    def __neg__(self):
        return ExtentVector(-self.coeffs, self.lag)

    def __sub__(self, other):
        return self + (-other)

    def __mul__(self, other):
        if np.isscalar(other):
            return ExtentVector(self.coeffs * other, self.lag)
        if isinstance(other, LaurentSeries):
            other = ExtentVector.from_entries({0: other})
        return self.convolve(other)

    __rmul__ = __mul__

    def convolve(self, other: "ExtentVector") -> "ExtentVector":
        """Space-time convolution: the product of the two spatio-temporal transforms."""
        if self.coeffs.shape[1] == 0 or other.coeffs.shape[1] == 0:
            return ExtentVector.zeros(self.extent + other.extent)
        out = _accel.conv2d(self.coeffs, other.coeffs)
        return ExtentVector(out, self.lag + other.lag)

    def __repr__(self):
        rows = ", ".join(f"{k}: {s!r}" for k, s in zip(range(-self.extent, self.extent + 1), self.entries) if not s.is_zero)
        return f"ExtentVector(extent={self.extent}, {{{rows}}})"


# ---------------------------------------------------------------------------
# norms and transforms
# ---------------------------------------------------------------------------

def h2_norm(v: ExtentVector | Iterable[ExtentVector]) -> float:
    """2-norm: root of the sum of squared impulse coefficients over sites and times.

    Accepts a single vector or an iterable of them (a stacked map).
    """
    if isinstance(v, ExtentVector):
        v = [v]
    total = 0.0
    for vec in v:
        if not vec.is_causal:
            raise ValueError("h2_norm requires causal entries")
        total += float(np.sum(np.abs(vec.coeffs) ** 2))
    return float(np.sqrt(total))


def _spatial_matrix(extent: int, thetas: np.ndarray) -> np.ndarray:
    k = np.arange(-extent, extent + 1)
    return np.exp(-1j * np.outer(thetas, k))


def spatial_eval(v: ExtentVector, theta: float) -> LaurentSeries:
    """Spatial Fourier transform ``sum_k v[k] e^{-ik theta}`` at one frequency."""
    w = _spatial_matrix(v.extent, np.array([theta]))[0]
    return series(w @ v.coeffs, v.lag)


def h2_norm_freq(v: ExtentVector | Iterable[ExtentVector], grid_size: int) -> float:
    """2-norm evaluated in spatial frequency.

    Evaluates the spatial transform on a uniform grid of ``grid_size`` points
    in ``[0, 2 pi)``, sums ``|.|^2`` over time, and integrates with the
    periodic trapezoid rule (weight ``1 / (2 pi)``).
    """
    vecs = [v] if isinstance(v, ExtentVector) else list(v)
    thetas = 2 * np.pi * np.arange(grid_size) / grid_size
    total = 0.0
    for vec in vecs:
        if grid_size < 2 * vec.extent + 2:
            raise ValueError(f"grid_size {grid_size} too small for extent {vec.extent} (need >= {2 * vec.extent + 2})")
        if not vec.is_causal:
            raise ValueError("h2_norm_freq requires causal entries")
        vals = _spatial_matrix(vec.extent, thetas) @ vec.coeffs
        total += float(np.mean(np.sum(np.abs(vals) ** 2, axis=1)))
    return float(np.sqrt(total))
