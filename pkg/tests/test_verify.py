import numpy as np
import pytest

from localsyn.plant import PlantParams
from localsyn.series import ExtentVector
from localsyn.sl_maps import build_r12, sl_index_maps
from localsyn.io_maps import build_lambda, io_index_maps
from localsyn.verify import (check_affine_laws, check_equivalence_stacks, check_membership, r12_from_rho,
                             run_audit, sigma_plus_beta_kernel)


def test_equivalence_passes(p):
    for E in range(5):
        rep = check_equivalence_stacks(p, E, tol=1e-11)
        assert rep.passed, rep.format()


def test_equivalence_fault_is_located(p):
    rep = check_equivalence_stacks(p, 1, fault="psi")
    assert not rep.passed
    bad = rep.failures
    assert len(bad) == 1 and "psi" in bad[0].name and "V[site" in bad[0].detail


def test_random_params_pass():
    rng = np.random.default_rng(7)
    for _ in range(3):
        q = PlantParams(*rng.uniform(-2, 2, 3))
        assert check_equivalence_stacks(q, 2).passed


def test_membership(p, rng):
    f = ExtentVector(rng.standard_normal((5, 4)))
    assert check_membership(sl_index_maps(p, build_r12(p, f))).passed
    assert check_membership(io_index_maps(p, build_lambda(p, f))).passed
    rep = check_membership(sl_index_maps(p, ExtentVector.delta(0, value=1.0).shift_time(1)))
    assert not rep.passed and any(c.name.startswith("l ") for c in rep.failures)
    rep = check_membership(sl_index_maps(p, ExtentVector.delta().shift_time(2)))
    assert not rep.passed and any(c.name.startswith("l ") for c in rep.failures)


def test_rho_helper_reproduces_offset(p, rng):
    f = ExtentVector(rng.standard_normal((3, 3)))
    assert r12_from_rho(p, 0.0, 1.0, sigma_plus_beta_kernel(p), f).allclose(build_r12(p, f), 1e-15)


def test_affine_laws(p):
    for E in (0, 3):
        rep = check_affine_laws(p, E)
        assert rep.passed, rep.format()


def test_audit_deterministic_and_flags_e0(p):
    a = run_audit(p, (0, 1), seed=3, random_params=1)
    b = run_audit(p, (0, 1), seed=3, random_params=1)
    assert a.passed and a.format() == b.format()
    assert any(n.startswith("E=0") for n in a.notes)
    assert not run_audit(p, (0,), fault="x2_wy").passed
    with pytest.raises(ValueError):
        run_audit(p, (0,), fault="n2")
