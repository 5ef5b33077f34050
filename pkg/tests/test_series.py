import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from localsyn.plant import FIG3_PARAMS
from localsyn.series import (CausalSeries, ExtentVector, LaurentSeries, causal_check, h2_norm, h2_norm_freq,
                             series, series_add, series_mul, spatial_eval)
from localsyn.sl_maps import offset_g


def coeffs(s):
    return list(s.coeffs)


def test_series_add_examples():
    assert coeffs(series_add(series([1, 2]), series([0, 0, 3]))) == [1, 2, 3]
    a = series([0.5, -1.0], 2)
    assert series_add(a, series([])).allclose(a, 0.0)
    assert series_add(series([1.0]), series([-1.0])).is_zero


def test_series_mul_examples():
    zb = series([1.0, -1.0], -1)  # z - 1
    out = series_mul(zb, series([1.0], 3))
    assert out.lag == 2 and coeffs(out) == [1.0, -1.0]
    a = series([2.0, 3.0], 1)
    assert series_mul(a, series([1.0])).allclose(a, 0.0)
    quad = series_mul(series([1.0, -2.0], -1), series([1.0, -3.0], -1))
    assert quad.terms() == [(2, 1.0), (1, -5.0), (0, 6.0)]
    assert not isinstance(quad, CausalSeries)


def test_trailing_zeros_trimmed():
    s = series([0.0, 1.0, 2.0, 0.0, 1e-16])
    assert s.lag == 1 and coeffs(s) == [1.0, 2.0]


def test_causal_series_rejects_positive_powers():
    with pytest.raises(ValueError):
        CausalSeries([1.0], -1)
    assert LaurentSeries([1.0, 0.0, 3.0], -1).to_causal(tol=2.0).terms() == [(-1, 3.0)]
    with pytest.raises(ValueError):
        LaurentSeries([1.0], -1).to_causal()


def test_causal_check_examples(p):
    ok, bad = causal_check(series([1.0, 3.0], 1))
    assert ok and bad == []
    ok, bad = causal_check(LaurentSeries.from_powers({1: 2.0, -1: 1.0}))
    assert not ok and bad == [(1, 2.0)]
    # l with the causal choice of the offset is causal at any sigma
    for th in (0.0, 1.0, np.pi):
        s = p.sigma(th)
        zs, zb = series([1, -s], -1), series([1, -p.beta], -1)
        r12 = series([1.0, s + p.beta], 2)
        ell = zs * zs * zb * zb * r12 - zb * zs
        assert causal_check(ell)[0]


def test_acausal_part_exact():
    s = LaurentSeries.from_powers({3: 1.0, 1: -2.0, 0: 5.0, -2: 7.0})
    assert s.acausal_part() == [(3, 1.0), (2, 0.0), (1, -2.0)]


def test_h2_norm_examples():
    assert h2_norm(ExtentVector.from_entries({0: series([1.0, 2.0, 3.0])})) == pytest.approx(np.sqrt(14))
    assert h2_norm(ExtentVector.zeros(3)) == 0.0
    v = ExtentVector.from_entries({-1: series([1.0]), 1: series([1.0])})
    assert h2_norm(v) == pytest.approx(np.sqrt(2))


def test_h2_norm_freq_examples(rng):
    v = ExtentVector(rng.standard_normal((7, 9)), 2)
    assert h2_norm_freq(v, 256) == pytest.approx(h2_norm(v), rel=1e-10)
    assert h2_norm_freq(ExtentVector.zeros(2), 256) == 0.0
    assert h2_norm_freq(ExtentVector.delta(), 256) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        h2_norm_freq(ExtentVector(np.ones((9, 1))), 9)


def test_spatial_eval_examples():
    v = ExtentVector(np.array([[1.0, 2.0], [3.0, 0.0], [0.5, 1.0]]))
    assert np.allclose(spatial_eval(v, 0.0).coeffs, [4.5, 3.0])
    th = 0.7
    sym = ExtentVector(np.array([[2.0], [5.0], [2.0]]))
    assert spatial_eval(sym, th).coeffs[0] == pytest.approx(5 + 4 * np.cos(th))
    g0 = spatial_eval(offset_g(FIG3_PARAMS, 1), 0.0)
    assert g0.lag == 2 and np.allclose(g0.coeffs, [1.0, 4.9])


def test_extent_vector_invariants():
    v = ExtentVector.from_entries({2: series([1.0], 1)}, 4)
    assert v.extent == 4 and v.coeffs.shape[0] == 9 and v.ext() == 2
    assert ExtentVector.zeros(2).ext() == -1
    with pytest.raises(ValueError):
        v.pad(1)
    assert v.pad(6).allclose(v, 0.0) and v.trimmed().extent == 2


_arr = st.lists(st.floats(-10, 10, allow_nan=False), min_size=1, max_size=6)


@given(_arr, _arr, _arr, st.integers(-3, 3), st.integers(-3, 3))
@settings(max_examples=60, deadline=None)
def test_mul_commutative_associative(a, b, c, la, lb):
    A, B, C = series(a, la), series(b, lb), series(c, 0)
    assert (A * B).allclose(B * A, 1e-12 * 1e4)
    assert ((A * B) * C).allclose(A * (B * C), 1e-12 * 1e5)


@given(_arr, _arr, st.integers(0, 3), st.integers(0, 3))
@settings(max_examples=60, deadline=None)
def test_product_of_causal_is_causal(a, b, la, lb):
    assert causal_check(series(a, la) * series(b, lb))[0]


@given(st.integers(0, 4), st.integers(1, 8), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_parseval_property(E, T, seed):
    v = ExtentVector(np.random.default_rng(seed).standard_normal((2 * E + 1, T)))
    n = h2_norm(v)
    assert abs(h2_norm_freq(v, 512) - n) <= 1e-10 * n


@given(st.integers(0, 4), st.floats(0, 2 * np.pi), st.integers(0, 2 ** 31 - 1))
@settings(max_examples=40, deadline=None)
def test_symmetric_vector_has_real_transform(E, th, seed):
    half = np.random.default_rng(seed).standard_normal((E + 1, 3))
    v = ExtentVector(np.vstack([half, half[-2::-1]]))
    assert np.max(np.abs(np.imag(spatial_eval(v, th).coeffs)), initial=0.0) <= 1e-12
