import importlib
import os
import subprocess
import sys

import numpy as np
import pytest

from localsyn import _accel

pytestmark = pytest.mark.skipif(_accel.numba_kernels is None, reason="numba not installed")


def test_kernels_agree(rng):
    V = rng.standard_normal((5, 3, 4))
    F = rng.standard_normal((3, 7))
    a, b = _accel.numpy_kernels, _accel.numba_kernels
    assert np.allclose(a.design_block(V, 6, 12), b.design_block(V, 6, 12), atol=0)
    assert np.allclose(a.apply_block(V, F, 10), b.apply_block(V, F, 10), atol=1e-13)
    A, B = rng.standard_normal((3, 5)), rng.standard_normal((7, 2))
    assert np.allclose(a.conv2d(A, B), b.conv2d(A, B), atol=1e-13)
    C = rng.standard_normal((3, 4)) + 1j * rng.standard_normal((3, 4))
    assert np.allclose(a.conv2d(A, C), b.conv2d(A, C), atol=1e-13)


def test_design_block_matches_apply(rng):
    V = rng.standard_normal((3, 2, 3))
    F = rng.standard_normal((2, 5))
    A = _accel.design_block(V, 4, 7)
    assert np.allclose(A @ F.ravel(), _accel.apply_block(V, F, 7).ravel())


def test_env_flag_selects_numpy():
    code = "import localsyn._accel as a; print(a.USE_NUMBA)"
    env = dict(os.environ, LOCALSYN_DISABLE_NUMBA="1")
    out = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    assert out.stdout.strip() == "False"
