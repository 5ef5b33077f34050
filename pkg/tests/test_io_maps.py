import numpy as np
import pytest

from localsyn.errors import PoleProximityError
from localsyn.io_maps import (IO_STACK, assemble_io, build_lambda, io_extents, io_freq_maps, io_index_maps,
                              measured_io_extents, recover_controller_io)
from localsyn.plant import PlantParams, sigma_at
from localsyn.series import ExtentVector, causal_check, series, spatial_eval
from localsyn.sl_maps import assemble_sl, build_r12, build_sl_blocks, recover_controller_sl
from localsyn.verify import random_decision


def test_freq_maps_examples(p):
    m = io_freq_maps(p, 0.5, series([]))
    assert m.gamma.is_zero and m.omega.is_zero
    s = sigma_at(p, 0.5)
    assert m.psi.allclose(-(series([1, -p.beta], -1) * series([1, -s], -1)), 1e-14)
    assert not causal_check(m.psi)[0]
    lam = series([1.0, s + p.beta], 2) + series([0.3, -0.2], 4)
    m = io_freq_maps(p, 0.5, lam)
    assert m.gamma is m.omega
    assert causal_check(m.psi)[0]


def test_build_lambda_equals_r12(p, rng):
    for E in range(4):
        f = random_decision(rng, E)
        assert build_lambda(p, f).allclose(build_r12(p, f), 0.0)
    assert build_lambda(PlantParams(1.5, 1.0, 0.0), ExtentVector.zeros(1)).ext() == 0


def test_assemble_io_blocks(p):
    io = assemble_io(p, 0)
    raw = build_sl_blocks(p, 0)
    assert io.names == IO_STACK and io.n_rows == 28 and io.is_causal
    assert io["gamma_m1"].h[0].coeff(0) == 0.0  # -1 folded against the offset
    assert io["psi"].V.shape == assemble_sl(p, 0)["l"].V.shape
    # the Toeplitz symbol of psi matches that of l (raw, without composition)
    assert np.allclose(io["psi"].dense_V(0, 12)[:, 0], raw["l"].dense_V(-4, 12)[:, 1])


def test_x2_blocks_are_scaled_first_blocks(p, rng):
    E = 2
    f = random_decision(rng, E)
    out = assemble_io(p, E).apply(f)
    zb = ExtentVector(np.array([[1.0, -p.beta]]), -1)
    assert out["x2_wy"].allclose(zb.convolve(out["gamma_m1"]), 1e-11)
    assert out["x2_wu"].allclose(zb.convolve(out["lambda"]), 1e-11)
    assert out["gamma_m1"].allclose(out["omega_m1"], 0.0)


def test_assembled_matches_direct(p, rng):
    for E in range(5):
        f = random_decision(rng, E)
        out = assemble_io(p, E).apply(f)
        direct = io_index_maps(p, build_lambda(p, f)).stack()
        for n in IO_STACK:
            assert out[n].allclose(direct[n], 1e-11)


def test_frequency_index_consistency(p, rng):
    f = random_decision(rng, 3)
    lam = build_lambda(p, f)
    idx = io_index_maps(p, lam)
    for th in rng.uniform(0, 2 * np.pi, 16):
        fr = io_freq_maps(p, th, spatial_eval(lam, th))
        for (_, v), (_, w) in zip(idx.items(), fr.items()):
            assert spatial_eval(v, th).allclose(w, 1e-10)


def test_extents(p, rng):
    assert io_extents(5) == {"Gamma": 6, "Lambda": 5, "Psi": 7, "Omega": 6}
    assert io_extents(0) == {"Gamma": 2, "Lambda": 1, "Psi": 3, "Omega": 2}
    assert io_extents(1)["Lambda"] == 1
    for E in range(6):
        m = io_index_maps(p, build_lambda(p, random_decision(rng, E)))
        assert measured_io_extents(m) == io_extents(E)


def test_controller_agrees_with_sl(p, rng):
    for _ in range(100):
        th = rng.uniform(0, 2 * np.pi)
        z = rng.choice([0.5, 1.0, 2.0]) * np.exp(1j * rng.uniform(0, 2 * np.pi))
        fz = complex(rng.standard_normal(), rng.standard_normal())
        a, b = recover_controller_io(p, fz, th, z), recover_controller_sl(p, fz, th, z)
        assert abs(a - b) <= 1e-10 * abs(b)
    q = PlantParams(1.3, 0.0, 0.4)
    assert recover_controller_io(q, 0.0, 0.8, 1.5j) == pytest.approx(recover_controller_sl(q, 0.0, 0.8, 1.5j))


def test_controller_gamma_zero(p):
    with pytest.raises(PoleProximityError):
        recover_controller_io(p, 0.3, 0.2, complex(p.beta))
