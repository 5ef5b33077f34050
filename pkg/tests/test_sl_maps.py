import numpy as np
import pytest

from localsyn.errors import PoleProximityError
from localsyn.plant import PlantParams, sigma_at
from localsyn.series import ExtentVector, causal_check, series, spatial_eval
from localsyn.sl_maps import (SL_STACK, assemble_sl, build_r12, build_sl_blocks, controller_from_sl_maps,
                              controller_formula, measured_sl_extents, offset_g, recover_controller_sl,
                              sl_extents, sl_freq_maps, sl_index_maps)
from localsyn.verify import random_decision


def test_freq_maps_examples(p):
    m = sl_freq_maps(PlantParams(1.5, 1.0, 0.8), 0.3, series([1.0], 2))
    assert m.r22.allclose(series([1.0, -1.0], 1), 1e-15)
    assert m.r21 is m.m2 is m.n1
    m0 = sl_freq_maps(p, 0.3, series([]))
    s = sigma_at(p, 0.3)
    assert m0.r21.allclose(series([-1.0]), 0.0)
    expect = -(series([1, -p.beta], -1) * series([1, -s], -1))
    assert m0.l.allclose(expect, 1e-14)
    assert not causal_check(m0.l)[0]


def test_build_r12_examples(p):
    r = build_r12(p, ExtentVector.zeros(2))
    assert r.extent == 3 and r.ext() == 1
    assert r[-1].allclose(series([1.2], 3)) and r[1].allclose(series([1.2], 3))
    assert r[0].allclose(series([1.0, 2.5], 2))
    r0 = build_r12(PlantParams(1.5, 1.0, 0.0), ExtentVector.zeros(0))
    assert r0.ext() == 0


def test_build_r12_transform(p, rng):
    f = random_decision(rng, 2)
    r = build_r12(p, f)
    for th in rng.uniform(0, 2 * np.pi, 6):
        s = sigma_at(p, th)
        expect = series([1.0, s + p.beta], 2) + spatial_eval(f, th) * series([1.0], 4)
        assert spatial_eval(r, th).allclose(expect, 1e-12)


def test_raw_blocks(p):
    raw = build_sl_blocks(p, 0)
    assert raw.names == SL_STACK and raw.input_extent == 1
    assert [b.out_extent for b in raw.blocks] == [2, 1, 2, 1, 3, 2]
    zb = series([1.0, -1.0], -1)
    n1 = raw["n1"]
    # column of input site 0: (z - 1) [-1.2, z - 1.5, -1.2] on sites -1, 0, 1
    assert n1.entry(-1, 0).allclose(zb * -1.2, 1e-14)
    assert n1.entry(0, 0).allclose(zb * series([1.0, -1.5], -1), 1e-14)
    assert n1.entry(2, 0).is_zero
    assert n1.h.allclose(ExtentVector.delta(2, value=-1.0), 0.0)
    za = series([1.0, -p.alpha], -1)
    ak = p.alpha * p.kappa
    assert raw["l"].entry(0, 0).allclose(zb * zb * (za * za + 2 * ak ** 2), 1e-13)
    assert all(b.is_toeplitz() for b in raw.blocks)


def test_assemble_sl_structure(p):
    pair = assemble_sl(p, 0)
    assert pair.input_extent == 0 and pair.n_rows == 28 and pair.is_causal
    r = pair["r12"]
    assert r.lag == 4 and np.array_equal(r.V[:, :, 0], [[0.0], [1.0], [0.0]])
    assert r.h.allclose(offset_g(p, 0), 0.0)
    for E in range(4):
        pair = assemble_sl(p, E)
        for b in pair.blocks:
            for i in range(-b.out_extent, b.out_extent + 1):
                for j in range(-E, E + 1):
                    assert causal_check(b.entry(i, j), 1e-12)[0]
            assert causal_check(b.h[0], 1e-12)[0]


def test_strictly_causal_blocks_have_no_direct_term(p):
    pair = assemble_sl(p, 3)
    for name in ("n1", "r12", "n2", "r22", "m2"):
        b = pair[name]
        assert b.lag >= 1 and b.h.lag >= 1


def test_assembled_matches_direct(p, rng):
    for E in range(5):
        f = random_decision(rng, E)
        out = assemble_sl(p, E).apply(f)
        direct = sl_index_maps(p, build_r12(p, f))
        for n in SL_STACK:
            assert out[n].allclose(getattr(direct, n), 1e-11)


def test_frequency_index_consistency(p, rng):
    for E in range(5):
        f = random_decision(rng, E)
        r12 = build_r12(p, f)
        idx = sl_index_maps(p, r12)
        for th in rng.uniform(0, 2 * np.pi, 16):
            fr = sl_freq_maps(p, th, spatial_eval(r12, th))
            for name, v in idx.items():
                assert spatial_eval(v, th).allclose(getattr(fr, name), 1e-10)


def test_affinity(p, rng):
    E = 2
    pair = assemble_sl(p, E)
    f1, f2 = random_decision(rng, E), random_decision(rng, E)
    a, b, c, d = pair.apply(f1 + f2), pair.apply(ExtentVector.zeros(E)), pair.apply(f1), pair.apply(f2)
    for n in pair.names:
        assert (a[n] + b[n]).allclose(c[n] + d[n], 1e-11)


def test_extents(p, rng):
    assert sl_extents(5) == {"R": 6, "N": 6, "M": 7, "L": 7}
    assert sl_extents(0) == {"R": 2, "N": 2, "M": 3, "L": 3}
    assert sl_extents(1) == sl_extents(0)
    with pytest.raises(ValueError):
        sl_extents(-1)
    for E in range(6):
        m = sl_index_maps(p, build_r12(p, random_decision(rng, E)))
        assert measured_sl_extents(m) == sl_extents(E)


def test_controller_examples():
    q = PlantParams(1.3, 0.0, 0.4)
    th, z = 0.8, 1.7 + 0.4j
    s = sigma_at(q, th)
    assert recover_controller_sl(q, 0.0, th, z) == pytest.approx(-z * s * s / (z + s), rel=1e-12)


def test_controller_matches_factored_form(p, rng):
    for _ in range(100):
        th = rng.uniform(0, 2 * np.pi)
        z = 2.0 * np.exp(1j * rng.uniform(0, 2 * np.pi))
        fz = complex(rng.standard_normal(), rng.standard_normal())
        a = recover_controller_sl(p, fz, th, z)
        b = controller_from_sl_maps(p, fz, th, z)
        assert abs(a - b) <= 1e-10 * abs(a)


def test_controller_pole_error(p):
    th, z = 0.4, 1.1 + 0.2j
    s = sigma_at(p, th)
    f_bad = -(z * z + (s + p.beta) * z)
    assert abs(controller_formula(p, f_bad, th, z)[1]) < 1e-12
    with pytest.raises(PoleProximityError):
        recover_controller_sl(p, f_bad, th, z)
