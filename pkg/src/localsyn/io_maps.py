"""Input-output (IO) parameterization of the chain.

With ``lambda`` the map from ``wu`` to ``y`` the remaining IO maps are::

    gamma = omega = (z - b)(z - s) lambda
    psi   = (z - b)^2 (z - s)^2 lambda - (z - b)(z - s)

and the second state is recovered as ``x2 = (z - b)((gamma - 1) wy + lambda wu)``.
Causality forces the same decomposition ``lambda = g + z^-4 f`` as in the SL
case. The stacked blocks here are built from space-time kernels directly, so
comparing them with :func:`localsyn.sl_maps.assemble_sl` is a genuine check.
"""
from __future__ import annotations

from dataclasses import dataclass

from .affine import AffineBlock, AffineMapPair, toeplitz_from_kernel
from .errors import AssemblyError, PoleProximityError
from .plant import PlantParams, sigma_at, z_minus, z_minus_beta, z_minus_sigma
from .series import ExtentVector, LaurentSeries
from .sl_maps import CAUSAL_TOL, build_r12, offset_g

__all__ = [
    "IO_STACK",
    "IOMapSet",
    "io_freq_maps",
    "io_index_maps",
    "build_lambda",
    "assemble_io",
    "io_extents",
    "measured_io_extents",
    "recover_controller_io",
]

# cost-stack order: y <- wy, y <- wu, x2 <- wy, x2 <- wu, u <- wy, u <- wu
IO_STACK = ("gamma_m1", "lambda", "x2_wy", "x2_wu", "psi", "omega_m1")
POLE_TOL = 1e-12


@dataclass(frozen=True, eq=False)
class IOMapSet:
    gamma: ExtentVector | LaurentSeries
    lam: ExtentVector | LaurentSeries
    psi: ExtentVector | LaurentSeries
    omega: ExtentVector | LaurentSeries
    x2_from_wy: ExtentVector | LaurentSeries
    x2_from_wu: ExtentVector | LaurentSeries
    domain: str = "index"

    def items(self):
        return [("gamma", self.gamma), ("lambda", self.lam), ("psi", self.psi), ("omega", self.omega)]

    def stack(self) -> dict:
        one = ExtentVector.delta() if self.domain == "index" else 1.0
        return {
            "gamma_m1": self.gamma - one,
            "lambda": self.lam,
            "x2_wy": self.x2_from_wy,
            "x2_wu": self.x2_from_wu,
            "psi": self.psi,
            "omega_m1": self.omega - one,
        }


def io_freq_maps(p: PlantParams, theta: float, lam: LaurentSeries) -> IOMapSet:
    zs = z_minus(sigma_at(p, theta))
    zb = z_minus(p.beta)
    gamma = zb * zs * lam
    return IOMapSet(
        gamma=gamma,
        lam=lam,
        psi=zb * zb * zs * zs * lam - zb * zs,
        omega=gamma,
        x2_from_wy=zb * (gamma - 1.0),
        x2_from_wu=zb * lam,
        domain="freq",
    )


def io_index_maps(p: PlantParams, lam: ExtentVector) -> IOMapSet:
    zs = z_minus_sigma(p)
    zb = z_minus_beta(p)
    zbs = zb.convolve(zs)
    gamma = zbs.convolve(lam)
    return IOMapSet(
        gamma=gamma,
        lam=lam,
        psi=zbs.convolve(zbs).convolve(lam) - zbs,
        omega=gamma,
        x2_from_wy=zb.convolve(gamma - ExtentVector.delta()),
        x2_from_wu=zb.convolve(lam),
        domain="index",
    )


def build_lambda(p: PlantParams, f) -> ExtentVector:
    """``lambda = g + z^-4 f``; the decomposition coincides with that of ``r12``."""
    return build_r12(p, f)


def assemble_io(p: PlantParams, E: int) -> AffineMapPair:
    """Stacked IO cost map ``f -> V f + h`` on a decision variable of extent ``E``.

    Each block is ``kernel * lambda + offset``; substituting ``lambda = g + z^-4 f``
    gives ``V`` as the Toeplitz matrix of ``z^-4 kernel`` and
    ``h = kernel * g + offset``.
    """
    if E < 0:
        raise ValueError("E must be nonnegative")
    zs = z_minus_sigma(p)
    zb = z_minus_beta(p)
    zbs = zb.convolve(zs)
    one = ExtentVector.delta()
    # (name, kernel acting on lambda, constant offset, output extent)
    spec = [
        ("gamma_m1", zbs, -one, E + 2),
        ("lambda", one, None, E + 1),
        ("x2_wy", zb.convolve(zbs), -zb, E + 2),
        ("x2_wu", zb, None, E + 1),
        ("psi", zbs.convolve(zbs), -zbs, E + 3),
        ("omega_m1", zbs, -one, E + 2),
    ]
    g = offset_g(p, 1)
    tol = CAUSAL_TOL * max(1.0, abs(p.alpha), abs(p.beta), abs(p.alpha * p.kappa)) ** 4
    blocks = []
    for name, kernel, offset, out_ext in spec:
        V, lag = toeplitz_from_kernel(kernel.shift_time(4), out_ext, E)
        h = kernel.convolve(g)
        if offset is not None:
            h = h + offset
        h = h.trimmed()
        if h.extent > out_ext:
            raise AssemblyError(f"block {name}: offset extent {h.extent} exceeds {out_ext}")
        blk = AffineBlock(name, V, lag, h.pad(out_ext), out_ext, E)
        blocks.append(blk.causal_part(tol))
    return AffineMapPair(tuple(blocks), E, param="io", meta={"plant": p, "E": E})


def io_extents(E: int) -> dict[str, int]:
    if E < 0:
        raise ValueError("E must be nonnegative")
    return {"Gamma": max(E + 1, 2), "Lambda": max(E, 1), "Psi": max(E + 2, 3), "Omega": max(E + 1, 2)}


def measured_io_extents(maps: IOMapSet, tol: float = 1e-12) -> dict[str, int]:
    """Measured extents; ``Lambda`` includes the fixed offset on ``|k| <= 1``."""
    if maps.domain != "index":
        raise ValueError("extents are measured on index-domain maps")
    return {
        "Gamma": maps.gamma.ext(tol),
        "Lambda": maps.lam.ext(tol),
        "Psi": maps.psi.ext(tol),
        "Omega": maps.omega.ext(tol),
    }


def recover_controller_io(p: PlantParams, f_eval: complex, theta: float, z: complex) -> complex:
    """``K = psi / gamma`` at ``(theta, z)``."""
    s = sigma_at(p, theta)
    b = p.beta
    lam = z ** -2 + (s + b) * z ** -3 + z ** -4 * f_eval
    gamma = (z - b) * (z - s) * lam
    if abs(gamma) < POLE_TOL:
        raise PoleProximityError(f"|gamma| = {abs(gamma):.3g} at theta={theta}, z={z}")
    psi = (z - b) ** 2 * (z - s) ** 2 * lam - (z - b) * (z - s)
    return complex(psi / gamma)

