"""Hot convolution kernels, compiled with numba when available.

Every kernel has a pure-numpy twin. Set ``LOCALSYN_DISABLE_NUMBA=1`` to force
the numpy path (useful for debugging and for the benchmark comparison). Both
paths are importable explicitly as ``numpy_kernels`` / ``numba_kernels``.
"""
from __future__ import annotations

import os
from types import SimpleNamespace

import numpy as np

__all__ = ["USE_NUMBA", "design_block", "apply_block", "conv2d", "numpy_kernels", "numba_kernels"]


def _env_disabled() -> bool:
    return os.environ.get("LOCALSYN_DISABLE_NUMBA", "").strip().lower() in {"1", "true", "yes", "on"}


# --------------------------------------------------------------------------
# numpy reference implementations
# --------------------------------------------------------------------------

def _np_design_block(V, T, row_len):
    n_out, n_in, D = V.shape
    A = np.zeros((n_out, row_len, n_in, T + 1), dtype=V.dtype)
    Vt = V.transpose(0, 2, 1)
    for tau in range(T + 1):
        A[:, tau:tau + D, :, tau] = Vt
    return A.reshape(n_out * row_len, n_in * (T + 1))


def _np_apply_block(V, F, row_len):
    n_out, n_in, D = V.shape
    width = F.shape[1]
    dtype = np.result_type(V.dtype, F.dtype)
    out = np.zeros((n_out, row_len), dtype=dtype)
    for d in range(D):
        out[:, d:d + width] += V[:, :, d] @ F
    return out


def _np_conv2d(a, b):
    if a.size < b.size:
        a, b = b, a
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra + rb - 1, ca + cb - 1), dtype=np.result_type(a.dtype, b.dtype))
    for i in range(rb):
        for j in range(cb):
            if b[i, j] != 0:
                out[i:i + ra, j:j + ca] += b[i, j] * a
    return out


numpy_kernels = SimpleNamespace(design_block=_np_design_block, apply_block=_np_apply_block, conv2d=_np_conv2d)


# --------------------------------------------------------------------------
# numba implementations (explicit loops)
# --------------------------------------------------------------------------

def _loop_design_block(V, T, row_len):
    n_out, n_in, D = V.shape
    A = np.zeros((n_out * row_len, n_in * (T + 1)), dtype=V.dtype)
    for i in range(n_out):
        for j in range(n_in):
            for d in range(D):
                v = V[i, j, d]
                if v == 0:
                    continue
                for tau in range(T + 1):
                    A[i * row_len + d + tau, j * (T + 1) + tau] = v
    return A


def _loop_apply_block(V, F, row_len):
    n_out, n_in, D = V.shape
    width = F.shape[1]
    out = np.zeros((n_out, row_len), dtype=F.dtype)
    for i in range(n_out):
        for j in range(n_in):
            for d in range(D):
                v = V[i, j, d]
                if v == 0:
                    continue
                for tau in range(width):
                    out[i, d + tau] += v * F[j, tau]
    return out


def _loop_conv2d(a, b):
    ra, ca = a.shape
    rb, cb = b.shape
    out = np.zeros((ra + rb - 1, ca + cb - 1), dtype=a.dtype)
    for i in range(rb):
        for j in range(cb):
            w = b[i, j]
            if w == 0:
                continue
            for p in range(ra):
                for q in range(ca):
                    out[i + p, j + q] += w * a[p, q]
    return out


try:
    import numba

    _nb_design = numba.njit(cache=True)(_loop_design_block)
    _nb_apply = numba.njit(cache=True)(_loop_apply_block)
    _nb_conv = numba.njit(cache=True)(_loop_conv2d)
    HAVE_NUMBA = True
except ImportError:  # pragma: no cover - numba is optional
    HAVE_NUMBA = False


def _nb_design_block(V, T, row_len):
    return _nb_design(np.ascontiguousarray(V), int(T), int(row_len))


def _nb_apply_block(V, F, row_len):
    dtype = np.result_type(V.dtype, F.dtype)
    return _nb_apply(np.ascontiguousarray(V, dtype=dtype), np.ascontiguousarray(F, dtype=dtype), int(row_len))


def _nb_conv2d(a, b):
    dtype = np.result_type(a.dtype, b.dtype)
    return _nb_conv(np.ascontiguousarray(a, dtype=dtype), np.ascontiguousarray(b, dtype=dtype))


if HAVE_NUMBA:
    numba_kernels = SimpleNamespace(design_block=_nb_design_block, apply_block=_nb_apply_block, conv2d=_nb_conv2d)
else:  # pragma: no cover
    numba_kernels = None

USE_NUMBA = HAVE_NUMBA and not _env_disabled()
_active = numba_kernels if USE_NUMBA else numpy_kernels


def design_block(V: np.ndarray, T: int, row_len: int) -> np.ndarray:
    """Convolution (design) matrix of a polynomial-matrix block.

    ``V`` has shape ``(n_out, n_in, D)`` with ``V[i, j, d]`` the coefficient of
    ``z^-d``. Unknowns are FIR sequences of length ``T + 1`` per input; the
    result maps the stacked unknowns to ``n_out`` output series of length
    ``row_len``, stacked row-major.
    """
    return _active.design_block(V, T, row_len)


def apply_block(V: np.ndarray, F: np.ndarray, row_len: int) -> np.ndarray:
    """Return ``out[i] = sum_j V[i, j] * F[j]`` as series of length ``row_len``."""
    return _active.apply_block(V, F, row_len)


def conv2d(a: np.ndarray, b: np.ndarray) -> np.ndarray:
    """Full two-dimensional convolution (space x time)."""
    return _active.conv2d(a, b)
