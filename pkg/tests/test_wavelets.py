import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from betashrink.errors import LevelError, ShapeError, UnsupportedFilterError
from betashrink.wavelets import WaveletDecomposition, daubechies_filter, dwt, dyadic_depth, idwt


def test_haar_two_level_example():
    haar = daubechies_filter(1)
    dec = dwt(np.array([1.0, 1.0, -1.0, -1.0]), haar, 1)
    np.testing.assert_allclose(dec.details[1], [0.0, 0.0], atol=1e-15)
    np.testing.assert_allclose(dec.scaling, [math.sqrt(2), -math.sqrt(2)], atol=1e-15)


def test_db2_matches_closed_form():
    s3 = math.sqrt(3.0)
    expected = np.array([1 + s3, 3 + s3, 3 - s3, 1 - s3]) / (4 * math.sqrt(2.0))
    np.testing.assert_allclose(daubechies_filter(2).lowpass, expected, atol=1e-14)


@pytest.mark.parametrize("N", [1, 2, 3, 4, 6, 8, 10, 14, 20])
def test_filter_orthonormality_and_moments(N):
    f = daubechies_filter(N)
    h, g = f.lowpass, f.highpass
    assert h.size == 2 * N
    assert h.sum() == pytest.approx(math.sqrt(2.0), abs=1e-12)
    for s in range(0, h.size, 2):
        shifted = np.dot(h[s:], h[: h.size - s])
        assert shifted == pytest.approx(1.0 if s == 0 else 0.0, abs=1e-12)
    k = np.arange(g.size, dtype=float)
    # high-pass annihilates polynomials of degree < N; scale k to keep the sums well conditioned
    for p in range(N):
        assert abs(np.dot(g, (k / g.size) ** p)) < 1e-10


def test_db10_leading_tap():
    # extremal-phase Daubechies 20-tap filter, first coefficient as tabulated in the literature
    assert daubechies_filter(10).lowpass[0] == pytest.approx(0.0266700579005473, abs=1e-12)


@pytest.mark.parametrize("N", [0, 21, -1])
def test_unsupported_filter(N):
    with pytest.raises(UnsupportedFilterError):
        daubechies_filter(N)


def test_bad_lengths_and_levels():
    f = daubechies_filter(2)
    with pytest.raises(ShapeError):
        dwt(np.ones(12), f, 1)
    with pytest.raises(LevelError):
        dwt(np.ones(16), f, 4)
    with pytest.raises(ShapeError):
        dyadic_depth(0)


@pytest.mark.parametrize("n", [64, 512, 1024])
@pytest.mark.parametrize("N", [1, 4, 10])
def test_round_trip_and_parseval(n, N):
    rng = np.random.default_rng(n + N)
    y = rng.standard_normal(n) * 5
    f = daubechies_filter(N)
    dec = dwt(y, f, 3)
    assert dec.energy() == pytest.approx(float(y @ y), rel=1e-12)
    assert np.max(np.abs(idwt(dec, f) - y)) < 1e-11
    assert sorted(dec.details) == list(range(3, dyadic_depth(n)))
    for j, v in dec.details.items():
        assert v.size == 2**j


def test_constant_signal_has_no_detail():
    f = daubechies_filter(4)
    dec = dwt(np.full(256, 2.5), f, 2)
    for v in dec.details.values():
        assert np.max(np.abs(v)) < 1e-11
    # scaling coefficients carry the mean times 2^((J - J0)/2)
    np.testing.assert_allclose(dec.scaling, 2.5 * 2 ** ((8 - 2) / 2), rtol=1e-12)


@settings(max_examples=25, deadline=None)
@given(st.integers(0, 2**32 - 1), st.floats(-3, 3), st.floats(-3, 3))
def test_linearity(seed, a, b):
    rng = np.random.default_rng(seed)
    x, y = rng.standard_normal((2, 128))
    f = daubechies_filter(3)
    lhs = dwt(a * x + b * y, f, 2).flat()
    rhs = a * dwt(x, f, 2).flat() + b * dwt(y, f, 2).flat()
    np.testing.assert_allclose(lhs, rhs, atol=1e-11)


def test_circular_shift_by_two_levels_is_equivariant_at_finest_level():
    # a shift by 2 samples moves every finest-level coefficient by one slot
    rng = np.random.default_rng(4)
    y = rng.standard_normal(64)
    f = daubechies_filter(2)
    d0 = dwt(y, f, 5).details[5]
    d1 = dwt(np.roll(y, 2), f, 5).details[5]
    np.testing.assert_allclose(np.roll(d0, 1), d1, atol=1e-12)


def test_filter_mismatch_rejected():
    dec = dwt(np.arange(16.0), daubechies_filter(2), 1)
    with pytest.raises(ShapeError):
        idwt(dec, daubechies_filter(3))


def test_decomposition_validation():
    with pytest.raises(ShapeError):
        WaveletDecomposition(np.zeros(2), {1: np.zeros(3)}, J=2, J0=1, filter_n=1)
