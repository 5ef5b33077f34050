"""Runnable audit of the structural identities behind the synthesis.

Checks are grouped into reports of named pass/fail results:

* ``check_equivalence_stacks``: the SL and IO stacks agree coefficient by
  coefficient, and the three controller expressions agree at sampled points.
* ``check_membership``: strict causality / causality / finiteness of a map set.
* ``check_affine_laws``: affinity, Toeplitz structure, extent bounds and
  agreement of index-domain maps with their frequency-domain formulas.
"""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

import numpy as np

from .affine import AffineBlock, AffineMapPair
from .errors import PoleProximityError
from .io_maps import (IOMapSet, assemble_io, build_lambda, io_extents, io_freq_maps, io_index_maps,
                      measured_io_extents, recover_controller_io)
from .model_match import SolverConfig, synthesize
from .plant import FIG3_PARAMS, PlantParams
from .series import ExtentVector, LaurentSeries, series, spatial_eval
from .sl_maps import (SLMapSet, assemble_sl, build_r12, controller_formula, controller_from_sl_maps,
                      measured_sl_extents, offset_g, sl_extents, sl_freq_maps, sl_index_maps)

__all__ = [
    "CheckResult",
    "Report",
    "check_equivalence_stacks",
    "check_controller_identity",
    "check_membership",
    "check_affine_laws",
    "r12_from_rho",
    "random_decision",
    "run_audit",
]

RADII = (0.5, 1.0, 2.0)


@dataclass(frozen=True)
class CheckResult:
    name: str
    passed: bool
    detail: str = ""

    def line(self) -> str:
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}" + (f": {self.detail}" if self.detail else "")


@dataclass
class Report:
    title: str
    checks: list[CheckResult] = field(default_factory=list)
    notes: list[str] = field(default_factory=list)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    @property
    def failures(self) -> list[CheckResult]:
        return [c for c in self.checks if not c.passed]

    def add(self, name: str, passed: bool, detail: str = "") -> CheckResult:
        c = CheckResult(name, bool(passed), detail)
        self.checks.append(c)
        return c

    def extend(self, other: "Report", prefix: str = "") -> None:
        for c in other.checks:
            self.checks.append(replace(c, name=prefix + c.name))
        self.notes.extend(other.notes)

    def format(self) -> str:
        lines = [f"== {self.title} =="]
        lines += [f"NOTE: {n}" for n in self.notes]
        lines += [c.line() for c in self.checks]
        n_fail = len(self.failures)
        lines.append(f"-- {len(self.checks) - n_fail}/{len(self.checks)} checks passed"
                     + ("" if not n_fail else f", {n_fail} FAILED"))
        return "\n".join(lines)

    def __str__(self):
        return self.format()


def random_decision(rng: np.random.Generator, E: int, taps: int = 6) -> ExtentVector:
    """Generic FIR decision variable with full extent ``E``."""
    f = rng.standard_normal((2 * E + 1, taps))
    f[0, 0] += np.sign(f[0, 0]) + (f[0, 0] == 0)
    f[-1, 0] += np.sign(f[-1, 0]) + (f[-1, 0] == 0)
    return ExtentVector(f)


def _eval_f(f: ExtentVector, theta: float, z: complex) -> complex:
    return complex(spatial_eval(f, theta)(z))


# ---------------------------------------------------------------------------
# SL / IO equivalence
# ---------------------------------------------------------------------------

def _block_diff(a: AffineBlock, b: AffineBlock) -> tuple[float, str]:
    """Largest coefficient mismatch between two blocks and where it occurs."""
    if (a.out_extent, a.in_extent) != (b.out_extent, b.in_extent):
        return np.inf, f"extents differ: {a.out_extent}<-{a.in_extent} vs {b.out_extent}<-{b.in_extent}"
    lo = min(a.lag, b.lag, 0)
    n = max(a.lag + a.V.shape[2], b.lag + b.V.shape[2]) - lo
    dV = np.abs(a.dense_V(lo, n) - b.dense_V(lo, n)) if n > 0 else np.zeros((1, 1, 1))
    worst, where = 0.0, ""
    if dV.size and dV.max() > 0:
        i, j, d = np.unravel_index(np.argmax(dV), dV.shape)
        worst = float(dV[i, j, d])
        where = f"V[site {i - a.out_extent}, input {j - a.in_extent}] coeff of z^{-(lo + d)}"
    lo = min(a.h.lag, b.h.lag, 0)
    n = max(a.h.max_delay, b.h.max_delay) - lo + 1
    if n > 0:
        dh = np.abs(a.h.dense(lo, n) - b.h.dense(lo, n))
        if dh.size and dh.max() > worst:
            k, d = np.unravel_index(np.argmax(dh), dh.shape)
            worst = float(dh[k, d])
            where = f"h[site {k - a.out_extent}] coeff of z^{-(lo + d)}"
    return worst, where


def inject_fault(pair: AffineMapPair, block: str = "psi", eps: float = 1e-6) -> AffineMapPair:
    """Copy of ``pair`` with the largest coefficient of one V block nudged by ``eps``."""
    if block not in pair.names:
        raise ValueError(f"no block named {block!r} (have {', '.join(pair.names)})")
    blocks = []
    for b in pair.blocks:
        if b.name == block:
            V = np.array(b.V)
            idx = np.unravel_index(np.argmax(np.abs(V)), V.shape)
            V[idx] += eps
            b = AffineBlock(b.name, V, b.lag, b.h, b.out_extent, b.in_extent)
        blocks.append(b)
    return AffineMapPair(tuple(blocks), pair.input_extent, pair.param, dict(pair.meta, fault=block))


def check_controller_identity(p: PlantParams, E: int, n_samples: int = 100, rtol: float = 1e-10,
                              seed: int = 0) -> Report:
    """``L - M R^-1 N``, ``psi / gamma`` and the closed form agree at random ``(theta, z)``."""
    rep = Report(f"controller identity E={E}")
    rng = np.random.default_rng(seed)
    f = random_decision(rng, E)
    worst, skipped, where = 0.0, 0, ""
    for s in range(n_samples):
        theta = float(rng.uniform(0, 2 * np.pi))
        z = RADII[s % len(RADII)] * np.exp(1j * rng.uniform(0, 2 * np.pi))
        fz = _eval_f(f, theta, z)
        try:
            k_sl = controller_from_sl_maps(p, fz, theta, z)
            k_io = recover_controller_io(p, fz, theta, z)
            num, den = controller_formula(p, fz, theta, z)
            if abs(den) < 1e-12:
                raise PoleProximityError("closed-form denominator vanishes")
            k_cf = num / den
        except PoleProximityError:
            skipped += 1
            continue
        scale = max(abs(k_cf), 1e-300)
        err = max(abs(k_sl - k_cf), abs(k_io - k_cf)) / scale
        if err > worst:
            worst, where = err, f"theta={theta:.6g}, z={z:.6g}"
    detail = f"max rel err {worst:.3g} over {n_samples - skipped} samples"
    if skipped:
        detail += f" ({skipped} skipped near a pole)"
    if worst > rtol:
        detail += f" at {where}"
    rep.add("L - M R^-1 N == psi/gamma == closed form", worst <= rtol and skipped < n_samples, detail)
    return rep


def check_equivalence_stacks(p: PlantParams, E: int, tol: float = 1e-11, n_samples: int = 100,
                             seed: int = 0, fault: str | None = None) -> Report:
    """Coefficient-level equality of the SL and IO stacks plus controller identity.

    ``fault`` names an IO block to perturb (test hook for the mismatch path).
    """
    rep = Report(f"SL/IO equivalence E={E}")
    sl, io = assemble_sl(p, E), assemble_io(p, E)
    if fault:
        io = inject_fault(io, fault)
    rep.add("stack sizes", sl.n_rows == io.n_rows and len(sl.blocks) == len(io.blocks),
            f"{sl.n_rows} vs {io.n_rows} rows")
    for a, b in zip(sl.blocks, io.blocks):
        err, where = _block_diff(a, b)
        rep.add(f"block {a.name} == {b.name}", err <= tol,
                f"max |diff| {err:.3g}" + (f" at {where}" if err > tol else ""))
    rep.extend(check_controller_identity(p, E, n_samples, seed=seed))
    return rep


# ---------------------------------------------------------------------------
# membership
# ---------------------------------------------------------------------------

def _profile(entry) -> tuple[float, float, bool]:
    """(max |coeff| at positive powers, max |coeff| at z^0, all finite)."""
    if isinstance(entry, ExtentVector):
        arr, lag = entry.coeffs, entry.lag
        cols = arr if arr.ndim == 2 else arr.reshape(1, -1)
    else:
        cols, lag = np.asarray(entry.coeffs).reshape(1, -1), entry.lag
    if cols.shape[1] == 0:
        return 0.0, 0.0, True
    powers = -(lag + np.arange(cols.shape[1]))
    mag = np.abs(cols)
    acausal = float(mag[:, powers > 0].max(initial=0.0))
    direct = float(mag[:, powers == 0].max(initial=0.0))
    return acausal, direct, bool(np.all(np.isfinite(cols)))


def check_membership(maps: SLMapSet | IOMapSet, tol: float = 1e-12) -> Report:
    """Strict causality where required, causality everywhere, finite coefficients."""
    rep = Report(f"membership ({type(maps).__name__}, {maps.domain})")
    if isinstance(maps, SLMapSet):
        strict = set(SLMapSet.strict)
        items = maps.items()
    else:
        strict = set()
        items = maps.items()
    for name, entry in items:
        acausal, direct, finite = _profile(entry)
        problems = []
        if not finite:
            problems.append("non-finite coefficient")
        if acausal > tol:
            problems.append(f"acausal coefficient {acausal:.3g}")
        if name in strict and direct > tol:
            problems.append(f"direct term {direct:.3g}")
        kind = "strictly causal" if name in strict else "causal"
        rep.add(f"{name} {kind}", not problems, "; ".join(problems))
    return rep


def r12_from_rho(p: PlantParams, rho1, rho2, rho3, f: ExtentVector | None = None) -> ExtentVector:
    """``rho1 z^-1 + rho2 z^-2 + rho3 z^-3 + z^-4 f`` with index-domain ``rho`` terms.

    Scalars are placed at site 0; ExtentVectors of constants are used as given.
    The causal choice is ``rho1 = 0``, ``rho2 = 1`` and ``rho3`` the kernel of
    ``sigma + beta``.
    """
    out = ExtentVector.zeros(1)
    for d, rho in ((1, rho1), (2, rho2), (3, rho3)):
        if not isinstance(rho, ExtentVector):
            rho = ExtentVector.delta(0, value=float(rho))
        out = out + rho.shift_time(d)
    if f is not None:
        out = out + f.shift_time(4)
    return out


def sigma_plus_beta_kernel(p: PlantParams) -> ExtentVector:
    ak = p.alpha * p.kappa
    return ExtentVector(np.array([[ak], [p.alpha + p.beta], [ak]]))


# ---------------------------------------------------------------------------
# affine structure and extents
# ---------------------------------------------------------------------------

def _extent_check(rep: Report, name: str, measured: dict, expected: dict) -> None:
    rep.add(name, measured == expected, f"measured {measured}, bound {expected}")


def _freq_index_check(p: PlantParams, f: ExtentVector, thetas: Sequence[float], tol: float) -> tuple[float, float]:
    r12 = build_r12(p, f)
    sl_idx = sl_index_maps(p, r12)
    io_idx = io_index_maps(p, build_lambda(p, f))
    worst_sl = worst_io = 0.0
    for th in thetas:
        r12_th = spatial_eval(r12, th)
        sl_fr = sl_freq_maps(p, th, r12_th)
        for name, v in sl_idx.items():
            worst_sl = max(worst_sl, _series_diff(spatial_eval(v, th), getattr(sl_fr, name)))
        io_fr = io_freq_maps(p, th, r12_th)
        for (name, v), (_, w) in zip(io_idx.items(), io_fr.items()):
            worst_io = max(worst_io, _series_diff(spatial_eval(v, th), w))
    return worst_sl, worst_io


def _series_diff(a: LaurentSeries, b: LaurentSeries) -> float:
    lo = min(a.lag, b.lag)
    n = max(a.max_delay, b.max_delay) - lo + 1
    if n <= 0:
        return 0.0
    return float(np.max(np.abs(a.dense(lo, n) - b.dense(lo, n)), initial=0.0))


def _is_diagonal(b: AffineBlock, atol: float = 0.0) -> bool:
    V = b.V
    for i in range(V.shape[0]):
        for j in range(V.shape[1]):
            if (i - b.out_extent) != (j - b.in_extent) and np.any(np.abs(V[i, j]) > atol):
                return False
    return True


def check_affine_laws(p: PlantParams, E: int, seed: int = 0, n_theta: int = 16, tol: float = 1e-10) -> Report:
    rep = Report(f"affine laws E={E}")
    rng = np.random.default_rng(seed)
    f1, f2 = random_decision(rng, E), random_decision(rng, E)
    zero = ExtentVector.zeros(E)
    for pair in (assemble_sl(p, E), assemble_io(p, E)):
        a, b, ab, z0 = pair.apply(f1), pair.apply(f2), pair.apply(f1 + f2), pair.apply(zero)
        err = max((ab[n] + z0[n]).max_abs_diff(a[n] + b[n]) for n in pair.names)
        rep.add(f"{pair.param}: affinity", err <= tol, f"max |diff| {err:.3g}")
        rep.add(f"{pair.param}: Toeplitz blocks", all(blk.is_toeplitz() for blk in pair.blocks))
        rep.add(f"{pair.param}: causal entries", pair.is_causal)
    # the r12 row is z^-4 times the padded identity, with offset g
    r = assemble_sl(p, E)["r12"]
    eye = np.zeros((2 * E + 3, 2 * E + 1, 1))
    eye[np.arange(1, 2 * E + 2), np.arange(2 * E + 1), 0] = 1.0
    ok = r.lag == 4 and r.V.shape == eye.shape and np.array_equal(r.V, eye) and r.h.allclose(offset_g(p, E), 0.0)
    rep.add("sl: r12 row is z^-4 [0; I; 0] with offset g", ok)

    # extents: generic f attains the bounds, f = 0 sits on the floors
    _extent_check(rep, "sl: extents, generic f", measured_sl_extents(sl_index_maps(p, build_r12(p, f1))), sl_extents(E))
    _extent_check(rep, "io: extents, generic f", measured_io_extents(io_index_maps(p, build_lambda(p, f1))), io_extents(E))
    _extent_check(rep, "sl: extents, f = 0", measured_sl_extents(sl_index_maps(p, build_r12(p, zero))), sl_extents(0))
    _extent_check(rep, "io: extents, f = 0", measured_io_extents(io_index_maps(p, build_lambda(p, zero))), io_extents(0))

    thetas = rng.uniform(0, 2 * np.pi, n_theta)
    e_sl, e_io = _freq_index_check(p, f1, thetas, tol)
    rep.add("sl: index maps match frequency formulas", e_sl <= tol, f"max |diff| {e_sl:.3g} over {n_theta} theta")
    rep.add("io: index maps match frequency formulas", e_io <= tol, f"max |diff| {e_io:.3g} over {n_theta} theta")

    decoupled = PlantParams(p.alpha, p.beta, 0.0)
    diag = all(_is_diagonal(b) for pair in (assemble_sl(decoupled, E), assemble_io(decoupled, E)) for b in pair.blocks)
    rep.add("zero coupling gives diagonal V blocks", diag)
    return rep


# ---------------------------------------------------------------------------
# full audit
# ---------------------------------------------------------------------------

def _membership_battery(p: PlantParams, E: int, rng: np.random.Generator) -> Report:
    rep = Report(f"membership E={E}")
    f = random_decision(rng, E)
    for maps in (sl_index_maps(p, build_r12(p, f)), io_index_maps(p, build_lambda(p, f))):
        sub = check_membership(maps)
        rep.add(f"{type(maps).__name__} from the causal decomposition", sub.passed,
                "; ".join(c.line() for c in sub.failures))
    bad = {
        "rho1 != 0": r12_from_rho(p, 1.0, 1.0, sigma_plus_beta_kernel(p), f),
        "rho2 != 1": r12_from_rho(p, 0.0, 0.5, sigma_plus_beta_kernel(p), f),
        "rho3 != sigma + beta": r12_from_rho(p, 0.0, 1.0, sigma_plus_beta_kernel(p) * 0.5, f),
    }
    for label, r12 in bad.items():
        sub = check_membership(sl_index_maps(p, r12))
        rep.add(f"r12 with {label} is rejected", not sub.passed)
    return rep


def run_audit(p: PlantParams = FIG3_PARAMS, E_list: Iterable[int] = (0, 1, 2, 3), seed: int = 0,
              random_params: int = 0, fault: str | None = None, horizon_T: int = 30) -> Report:
    """Full verification battery.

    ``random_params`` adds that many random ``(alpha, beta, kappa)`` triples in
    ``[-2, 2]^3`` checked for equivalence at ``E = 2``. ``fault`` perturbs one
    IO block (test hook; the audit must then fail).
    """
    rep = Report(f"audit alpha={p.alpha:g} beta={p.beta:g} kappa={p.kappa:g} seed={seed}")
    rng = np.random.default_rng(seed)
    for E in E_list:
        eq = check_equivalence_stacks(p, E, seed=seed + E, fault=fault)
        rep.extend(eq, f"E={E} equivalence: ")
        rep.extend(check_affine_laws(p, E, seed=seed + E), f"E={E} affine: ")
        rep.extend(_membership_battery(p, E, rng), f"E={E} membership: ")
        if E == 0:
            cfg = SolverConfig(horizon_T=horizon_T)
            j_sl, j_io = synthesize(p, 0, cfg, "sl").J, synthesize(p, 0, cfg, "io").J
            same = eq.passed and abs(j_sl - j_io) <= 1e-8 * j_sl
            rep.add("E=0 costs: SL == IO", abs(j_sl - j_io) <= 1e-8 * j_sl, f"{j_sl:.15g} vs {j_io:.15g}")
            rep.notes.append(
                "E=0: the SL and IO stacks "
                + ("coincide coefficient by coefficient and give the same optimal cost "
                   f"({j_sl:.15g}); the two feasible sets are equal, not disjoint, at E=0."
                   if same else "DIFFER at E=0; see the failed checks below."))
    if random_params:
        prng = np.random.default_rng(seed + 1000)
        for i in range(random_params):
            a, b, k = prng.uniform(-2, 2, 3)
            q = PlantParams(float(a), float(b), float(k))
            rep.extend(check_equivalence_stacks(q, 2, seed=seed + i, fault=fault),
                       f"random params #{i} ({a:.4f}, {b:.4f}, {k:.4f}) E=2: ")
    return rep
