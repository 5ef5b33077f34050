"""System-level (SL) parameterization of the chain.

With ``r12`` the map from the input disturbance ``wu`` to ``x1``, every SL
closed-loop map is affine in ``r12``::

    r11 = (z - s) r12
    r21 = m2 = n1 = (z - s)(z - b) r12 - 1
    r22 = (z - b) r12
    m1  = (z - s)^2 (z - b) r12 - (z - s)
    n2  = (z - s)(z - b)^2 r12 - (z - b)
    l   = (z - s)^2 (z - b)^2 r12 - (z - b)(z - s)

where ``s`` is the coupling symbol ``sigma`` and ``b = beta``. All of them are
causal exactly when ``r12 = z^-2 + (s + b) z^-3 + z^-4 f`` with ``f`` causal.
Here ``f`` is the free decision variable, FIR with finite spatial extent.
"""
from __future__ import annotations

from dataclasses import dataclass, fields
from typing import Union

import numpy as np

from .affine import AffineBlock, AffineMapPair, toeplitz_from_symbol
from .errors import AssemblyError, PoleProximityError
from .plant import PlantParams, sigma_at, z_minus, z_minus_beta, z_minus_sigma
from .series import ExtentVector, LaurentSeries, series

__all__ = [
    "SL_STACK",
    "SLMapSet",
    "sl_freq_maps",
    "sl_index_maps",
    "offset_g",
    "as_decision",
    "build_r12",
    "build_sl_blocks",
    "assemble_sl",
    "sl_extents",
    "measured_sl_extents",
    "sl_point_maps",
    "controller_from_sl_maps",
    "recover_controller_sl",
    "controller_formula",
]

# cost-stack order: x1 <- wy, x1 <- wu, x2 <- wy, x2 <- wu, u <- wy, u <- wu
SL_STACK = ("n1", "r12", "n2", "r22", "l", "m2")
CAUSAL_TOL = 1e-12
POLE_TOL = 1e-12

Entry = Union[ExtentVector, LaurentSeries]


@dataclass(frozen=True, eq=False)
class SLMapSet:
    """The nine scalar SL maps, either index-domain vectors or fixed-theta series."""

    r11: Entry
    r12: Entry
    r21: Entry
    r22: Entry
    m1: Entry
    m2: Entry
    n1: Entry
    n2: Entry
    l: Entry
    domain: str = "index"

    def items(self):
        return [(f.name, getattr(self, f.name)) for f in fields(self) if f.name != "domain"]

    def stack(self) -> dict[str, Entry]:
        return {name: getattr(self, name) for name in SL_STACK}

    # strictly causal members (z^-1 RH-infinity); ``l`` only needs causality
    strict = ("r11", "r12", "r21", "r22", "m1", "m2", "n1", "n2")


def sl_freq_maps(p: PlantParams, theta: float, r12: LaurentSeries) -> SLMapSet:
    """SL maps at one spatial frequency from a given ``r12`` series."""
    zs = z_minus(sigma_at(p, theta))
    zb = z_minus(p.beta)
    n1 = zs * zb * r12 - 1.0
    return SLMapSet(
        r11=zs * r12,
        r12=r12,
        r21=n1,
        r22=zb * r12,
        m1=zs * zs * zb * r12 - zs,
        m2=n1,
        n1=n1,
        n2=zs * zb * zb * r12 - zb,
        l=zs * zs * zb * zb * r12 - zb * zs,
        domain="freq",
    )


def sl_index_maps(p: PlantParams, r12: ExtentVector) -> SLMapSet:
    """SL maps in the spatial index domain (response to an impulse at site 0)."""
    zs = z_minus_sigma(p)
    zb = z_minus_beta(p)
    one = ExtentVector.delta()
    n1 = zs.convolve(zb).convolve(r12) - one
    return SLMapSet(
        r11=zs.convolve(r12),
        r12=r12,
        r21=n1,
        r22=zb.convolve(r12),
        m1=zs.convolve(zs).convolve(zb).convolve(r12) - zs,
        m2=n1,
        n1=n1,
        n2=zs.convolve(zb).convolve(zb).convolve(r12) - zb,
        l=zs.convolve(zs).convolve(zb).convolve(zb).convolve(r12) - zb.convolve(zs),
        domain="index",
    )


def offset_g(p: PlantParams, E: int) -> ExtentVector:
    """Fixed part of ``r12`` forced by causality, declared on ``-(E+1) .. E+1``."""
    ak = p.alpha * p.kappa
    g = {
        -1: series([ak], 3),
        0: series([1.0, p.alpha + p.beta], 2),
        1: series([ak], 3),
    }
    return ExtentVector.from_entries(g, E + 1)


def as_decision(f, E: int | None = None) -> ExtentVector:
    """Coerce a decision variable to an :class:`ExtentVector`.

    Accepts an ExtentVector or an array of shape ``(2E+1, T+1)`` holding the
    FIR coefficients (column ``t`` multiplies ``z^-t``).
    """
    if isinstance(f, ExtentVector):
        v = f
    else:
        arr = np.atleast_2d(np.asarray(f, dtype=float))
        v = ExtentVector(arr) if arr.size else ExtentVector.zeros((arr.shape[0] - 1) // 2)
    if E is not None and v.extent != E:
        v = v.pad(E)
    if not v.is_causal:
        raise ValueError("decision variable f must be causal")
    return v


def build_r12(p: PlantParams, f) -> ExtentVector:
    """``r12 = g + z^-4 f`` with extent ``E + 1`` (``f`` zero-padded)."""
    f = as_decision(f)
    E = f.extent
    return offset_g(p, E) + f.shift_time(4).pad(E + 1)


# ---------------------------------------------------------------------------
# index-domain blocks, written out entry by entry
# ---------------------------------------------------------------------------

def build_sl_blocks(p: PlantParams, E: int) -> AffineMapPair:
    """The six raw Toeplitz blocks acting on ``r12`` of extent ``E + 1``.

    Block order and output extents: n1 (E+2), r12 (E+1), n2 (E+2),
    r22 (E+1), l (E+3), m2 (E+2).
    """
    if E < 0:
        raise ValueError("E must be nonnegative")
    a, ak = p.alpha, p.alpha * p.kappa
    zb = z_minus(p.beta)
    za = z_minus(a)
    n_in = E + 1

    sym_n1 = {-1: zb * (-ak), 0: zb * za, 1: zb * (-ak)}
    sym_l = {
        -2: zb * zb * (ak ** 2),
        -1: zb * zb * za * (-2 * ak),
        0: zb * zb * (za * za + 2 * ak ** 2),
        1: zb * zb * za * (-2 * ak),
        2: zb * zb * (ak ** 2),
    }
    minus_delta = ExtentVector.delta(E + 2, value=-1.0)

    def block(name, sym, out_ext, h):
        V, lag = toeplitz_from_symbol(sym, out_ext, n_in)
        return AffineBlock(name, V, lag, h, out_ext, n_in)

    blocks = [
        block("n1", sym_n1, E + 2, minus_delta),
        block("r12", {0: series([1.0])}, E + 1, ExtentVector.zeros(E + 1)),
        block("n2", {d: zb * s for d, s in sym_n1.items()}, E + 2, minus_delta * zb),
        block("r22", {0: zb}, E + 1, ExtentVector.zeros(E + 1)),
        block("l", sym_l, E + 3, ExtentVector.from_entries({-1: zb * ak, 0: zb * (-za), 1: zb * ak}, E + 3)),
        block("m2", sym_n1, E + 2, minus_delta),
    ]
    return AffineMapPair(tuple(blocks), n_in, param="sl-raw", meta={"plant": p, "E": E})


def assemble_sl(p: PlantParams, E: int) -> AffineMapPair:
    """Stacked SL cost map ``f -> V f + h`` on a decision variable of extent ``E``.

    Each raw block is composed with the selection ``z^-4 [0; I; 0]`` and the
    fixed offset ``g`` is folded into ``h``.
    """
    raw = build_sl_blocks(p, E)
    g = offset_g(p, E)
    out = []
    for b in raw.blocks:
        V = b.V[:, 1:-1, :]
        h = b.matvec(g) + b.h
        blk = AffineBlock(b.name, V, b.lag + 4, h, b.out_extent, E)
        out.append(blk.causal_part(CAUSAL_TOL * _scale(p)))
    pair = AffineMapPair(tuple(out), E, param="sl", meta={"plant": p, "E": E})
    if not pair.is_causal:  # pragma: no cover - causal_part guarantees this
        raise AssemblyError("assembled SL map is not causal")
    return pair


def _scale(p: PlantParams) -> float:
    return max(1.0, abs(p.alpha), abs(p.beta), abs(p.alpha * p.kappa)) ** 4


# ---------------------------------------------------------------------------
# extents
# ---------------------------------------------------------------------------

def sl_extents(E: int) -> dict[str, int]:
    """Extent bounds of the SL blocks for a decision variable of extent ``E``."""
    if E < 0:
        raise ValueError("E must be nonnegative")
    return {"R": max(E + 1, 2), "N": max(E + 1, 2), "M": max(E + 2, 3), "L": max(E + 2, 3)}


def measured_sl_extents(maps: SLMapSet, tol: float = 1e-12) -> dict[str, int]:
    if maps.domain != "index":
        raise ValueError("extents are measured on index-domain maps")
    e = {name: v.ext(tol) for name, v in maps.items()}
    return {
        "R": max(e["r11"], e["r12"], e["r21"], e["r22"]),
        "N": max(e["n1"], e["n2"]),
        "M": max(e["m1"], e["m2"]),
        "L": e["l"],
    }


# ---------------------------------------------------------------------------
# controller recovery at a point (theta, z)
# ---------------------------------------------------------------------------

def sl_point_maps(p: PlantParams, theta: float, z: complex, f_eval: complex) -> dict[str, complex]:
    """Values of the SL maps at ``(theta, z)`` given ``f(theta, z)``."""
    s = sigma_at(p, theta)
    b = p.beta
    r12 = z ** -2 + (s + b) * z ** -3 + z ** -4 * f_eval
    n1 = (z - s) * (z - b) * r12 - 1
    return {
        "r11": (z - s) * r12,
        "r12": r12,
        "r21": n1,
        "r22": (z - b) * r12,
        "m1": (z - s) ** 2 * (z - b) * r12 - (z - s),
        "m2": n1,
        "n1": n1,
        "n2": (z - s) * (z - b) ** 2 * r12 - (z - b),
        "l": (z - s) ** 2 * (z - b) ** 2 * r12 - (z - b) * (z - s),
    }


def controller_from_sl_maps(p: PlantParams, f_eval: complex, theta: float, z: complex) -> complex:
    """``K = L - M R^{-1} N`` from the factored maps."""
    m = sl_point_maps(p, theta, z, f_eval)
    R = np.array([[m["r11"], m["r12"]], [m["r21"], m["r22"]]], dtype=complex)
    det = R[0, 0] * R[1, 1] - R[0, 1] * R[1, 0]
    if abs(det) < POLE_TOL:
        raise PoleProximityError(f"R is singular at theta={theta}, z={z}")
    M = np.array([m["m1"], m["m2"]], dtype=complex)
    N = np.array([m["n1"], m["n2"]], dtype=complex)
    return complex(m["l"] - M @ np.linalg.solve(R, N))


def controller_formula(p: PlantParams, f_eval: complex, theta: float, z: complex) -> tuple[complex, complex]:
    """Numerator and denominator of the closed-form controller."""
    s = sigma_at(p, theta)
    b = p.beta
    num = (z - b) * (f_eval * (z - s) - z * s * (s + b)) - z ** 2 * b ** 2
    den = z ** 2 + (s + b) * z + f_eval
    return num, den


def recover_controller_sl(p: PlantParams, f_eval: complex, theta: float, z: complex) -> complex:
    """Closed-form controller frequency response at ``(theta, z)``."""
    num, den = controller_formula(p, f_eval, theta, z)
    if abs(den) < POLE_TOL:
        raise PoleProximityError(f"controller denominator {abs(den):.3g} at theta={theta}, z={z}")
    return complex(num / den)
