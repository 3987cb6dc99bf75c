import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavenets.filterbank import random_orthogonal_bank
from wavenets.tensor import Rng, ShapeError
from wavenets.wavelet import (AVERAGING, HAAR_AVERAGING, HAAR_ORTHONORMAL, ORTHONORMAL, Subbands,
                              WaveletBank, build_wavelet_matrix, dwt2d_conv, dwt2d_grouped_conv,
                              dwt2d_matmul, dwt_multilevel, effective_kernel, haar_recursive_approx,
                              idwt2d, multilevel_backward, multilevel_forward, num_levels, pad_mean,
                              pad_mean_adjoint, pad_preserving_gap)

R2 = 1 / math.sqrt(2)
X22 = np.array([[1.0, 2.0], [3.0, 4.0]])


def first(sub):
    """Drop the batch/channel axes of a single-image conv result."""
    return Subbands.from_stack(sub.stack()[:, 0, 0])


def test_haar_bank_filters():
    b = HAAR_ORTHONORMAL
    np.testing.assert_allclose(b.f_a, 0.5 * np.ones((2, 2)))
    np.testing.assert_allclose(b.f_v, 0.5 * np.array([[1, -1], [1, -1]]))
    np.testing.assert_allclose(b.f_h, 0.5 * np.array([[1, 1], [-1, -1]]))
    np.testing.assert_allclose(b.f_d, 0.5 * np.array([[1, -1], [-1, 1]]))
    np.testing.assert_allclose(HAAR_AVERAGING.f_a, 0.25 * np.ones((2, 2)))


def test_wavelet_matrix_small():
    np.testing.assert_allclose(build_wavelet_matrix(HAAR_ORTHONORMAL, 2), [[R2, R2], [R2, -R2]])
    expected = np.array([
        [R2, R2, 0, 0],
        [0, 0, R2, R2],
        [R2, -R2, 0, 0],
        [0, 0, R2, -R2],
    ])
    np.testing.assert_allclose(build_wavelet_matrix(HAAR_ORTHONORMAL, 4), expected)


@pytest.mark.parametrize("n", [2, 4, 6, 16, 30])
def test_wavelet_matrix_orthogonal(n):
    w = build_wavelet_matrix(HAAR_ORTHONORMAL, n)
    np.testing.assert_allclose(w @ w.T, np.eye(n), atol=1e-14)


def test_wavelet_matrix_errors():
    with pytest.raises(ValueError, match="even"):
        build_wavelet_matrix(HAAR_ORTHONORMAL, 5)
    with pytest.raises(ValueError, match="separable"):
        build_wavelet_matrix(random_orthogonal_bank(Rng(0), 2), 4)


def test_dwt_matmul_hand_values():
    s = dwt2d_matmul(X22, HAAR_ORTHONORMAL)
    np.testing.assert_allclose([s.a[0, 0], s.v[0, 0], s.h[0, 0], s.d[0, 0]], [5, -1, -2, 0], atol=1e-14)
    # same numbers straight from W X W^T with the explicit 2x2 matrix
    w = np.array([[R2, R2], [R2, -R2]])
    y = w @ X22 @ w.T
    np.testing.assert_allclose(y, [[5, -1], [-2, 0]], atol=1e-14)


def test_dwt_matmul_constant_and_odd():
    s = dwt2d_matmul(np.full((4, 4), 3.0), HAAR_ORTHONORMAL)
    np.testing.assert_allclose(s.a, 6.0)
    for band in (s.v, s.h, s.d):
        np.testing.assert_allclose(band, 0.0, atol=1e-14)
    with pytest.raises(ShapeError, match="pad"):
        dwt2d_matmul(np.ones((3, 4)), HAAR_ORTHONORMAL)


def test_dwt_conv_hand_values():
    s = first(dwt2d_conv(X22[None, None], HAAR_ORTHONORMAL))
    np.testing.assert_allclose([s.a[0, 0], s.v[0, 0], s.h[0, 0], s.d[0, 0]], [5, -1, -2, 0], atol=1e-14)
    assert first(dwt2d_conv(X22[None, None], HAAR_AVERAGING)).a[0, 0] == pytest.approx(2.5, abs=1e-15)


def test_dwt_conv_is_grouped_convolution(nprng):
    x = nprng.normal(size=(2, 3, 10, 10))
    for bank in (HAAR_ORTHONORMAL, random_orthogonal_bank(Rng(4), 3)):
        np.testing.assert_allclose(dwt2d_conv(x, bank).stack(), dwt2d_grouped_conv(x, bank).stack(), atol=1e-12)


def test_cross_path_batch(nprng):
    x = nprng.normal(size=(2, 3, 16, 16))
    conv = dwt2d_conv(x, HAAR_ORTHONORMAL).stack()
    for n in range(2):
        for c in range(3):
            np.testing.assert_allclose(dwt2d_matmul(x[n, c], HAAR_ORTHONORMAL).stack(), conv[:, n, c], atol=1e-10)


def test_dwt_conv_too_small():
    with pytest.raises(ShapeError):
        dwt2d_conv(np.ones((1, 1, 2, 2)), random_orthogonal_bank(Rng(0), 3))


def test_energy_preservation(nprng):
    x = nprng.normal(size=(12, 8))
    e = sum(dwt2d_matmul(x, HAAR_ORTHONORMAL).energies().values())
    assert e == pytest.approx(np.sum(x * x), rel=1e-12)


def test_bessel_bound_for_larger_filters(nprng):
    # stride-2 passes with d > 2 overlap, so only an upper bound survives per patch
    for d in (3, 4, 5):
        bank = random_orthogonal_bank(Rng(d), d)
        x = nprng.normal(size=(1, 1, 2 * d + 1, 2 * d + 1))
        n_out = (d + 1) // 2 + 1
        patch_energy = sum(np.sum(x[0, 0, 2 * i:2 * i + d, 2 * j:2 * j + d] ** 2)
                           for i in range(n_out) for j in range(n_out))
        assert sum(dwt2d_conv(x, bank).energies().values()) <= patch_energy + 1e-12


def test_idwt_round_trip(nprng):
    x = nprng.normal(size=(8, 8))
    for bank in (HAAR_ORTHONORMAL, random_orthogonal_bank(Rng(9), 2)):
        np.testing.assert_allclose(idwt2d(dwt2d_conv(x, bank), bank)[0, 0], x, atol=1e-12)
        np.testing.assert_allclose(idwt2d(dwt2d_matmul(x, HAAR_ORTHONORMAL), HAAR_ORTHONORMAL), x, atol=1e-12)


def test_idwt_zero_and_constant():
    z = np.zeros((4, 4))
    np.testing.assert_array_equal(idwt2d(Subbands(z, z, z, z), HAAR_ORTHONORMAL), np.zeros((8, 8)))
    # approximation 2 with zero details inverts to a constant 1 image (one level halves the amplitude)
    np.testing.assert_allclose(idwt2d(Subbands(np.full((4, 4), 2.0), z, z, z), HAAR_ORTHONORMAL), np.ones((8, 8)))


def test_idwt_rejects_non_invertible():
    z = np.zeros((2, 2))
    with pytest.raises(ValueError, match="orthonormal"):
        idwt2d(Subbands(z, z, z, z), HAAR_AVERAGING)
    with pytest.raises(ValueError, match="inverse"):
        idwt2d(Subbands(z, z, z, z), random_orthogonal_bank(Rng(1), 3))


def test_pad_preserving_gap_cases(nprng):
    np.testing.assert_array_equal(pad_preserving_gap(np.full((3, 3), 7.0)), np.full((4, 4), 7.0))
    even = nprng.normal(size=(4, 6))
    assert pad_preserving_gap(even) is even
    x = nprng.normal(size=(3, 4))
    p = pad_preserving_gap(x)
    assert p.shape == (4, 4)
    assert abs(p.mean() - x.mean()) <= 1e-12


def test_pad_mean_adjoint(nprng):
    x = nprng.normal(size=(2, 5, 3))
    g = nprng.normal(size=(2, 6, 4))
    assert np.sum(pad_mean(x, 6, 4) * g) == pytest.approx(np.sum(x * pad_mean_adjoint(g, 5, 3)), abs=1e-12)


def test_haar_recursive_examples(nprng):
    assert haar_recursive_approx(X22, AVERAGING) == pytest.approx(2.5, abs=1e-15)
    assert haar_recursive_approx(np.full((32, 32), -1.25), AVERAGING) == pytest.approx(-1.25, abs=1e-14)
    x = nprng.normal(size=(7, 5))
    assert abs(haar_recursive_approx(x, AVERAGING) - x.mean()) <= 1e-10
    assert haar_recursive_approx(np.array([[4.0]])) == 4.0


def test_haar_orthonormal_scaling(nprng):
    for j in range(1, 6):
        x = nprng.random((2 ** j, 2 ** j))
        assert haar_recursive_approx(x, ORTHONORMAL) == pytest.approx(2 ** j * x.mean(), rel=1e-12)


def test_num_levels():
    assert num_levels(32, 32) == 5
    assert num_levels(7, 5) == 3
    assert num_levels(1, 1) == 0
    assert num_levels(1, 64) == 6


def test_multilevel_matches_haar_and_degenerate_weights(nprng):
    x = nprng.normal(size=(16, 16))
    assert dwt_multilevel(x, HAAR_AVERAGING) == pytest.approx(haar_recursive_approx(x), abs=1e-14)
    assert dwt_multilevel(x, HAAR_AVERAGING, combine_weights=[1, 0, 0, 0]) == pytest.approx(
        dwt_multilevel(x, HAAR_AVERAGING), abs=1e-15)
    with pytest.raises(ValueError):
        dwt_multilevel(x, HAAR_AVERAGING, levels=0)


def test_multilevel_unrolled_oracle(nprng):
    bank = random_orthogonal_bank(Rng(21), 2)
    x = nprng.normal(size=(8, 8))
    cur = x[None, None]
    for _ in range(3):
        cur = dwt2d_conv(cur, bank).a
    assert dwt_multilevel(x, bank, levels=3) == pytest.approx(cur[0, 0, 0, 0], abs=1e-12)
    # weighted recursion unrolled by hand
    w = np.array([0.7, -0.2, 0.4, 0.1])
    cur = x[None, None]
    for _ in range(3):
        cur = np.tensordot(w, dwt2d_conv(cur, bank).stack(), axes=(0, 0))
    assert dwt_multilevel(x, bank, levels=3, combine_weights=w) == pytest.approx(cur[0, 0, 0, 0], abs=1e-12)


def test_multilevel_partial_levels_returns_map(nprng):
    out = dwt_multilevel(nprng.normal(size=(8, 8)), HAAR_ORTHONORMAL, levels=2)
    assert out.shape == (2, 2)


@pytest.mark.parametrize("d", [2, 3, 4, 5])
@pytest.mark.parametrize("size", [4, 7, 16])
def test_effective_kernel_matches_recursion(d, size, nprng):
    bank = random_orthogonal_bank(Rng(d * 31 + size), d)
    k = effective_kernel(bank, size, size)
    for _ in range(3):
        x = nprng.normal(size=(size, size))
        assert np.sum(k * x) == pytest.approx(dwt_multilevel(x, bank), abs=1e-12)


def test_multilevel_backward_finite_difference(nprng):
    bank = random_orthogonal_bank(Rng(2), 3)
    x = nprng.normal(size=(2, 9, 9))
    w = nprng.normal(size=4)
    g = nprng.normal(size=(2, 1, 1))
    _, cache = multilevel_forward(x, bank, w)
    gx, gw = multilevel_backward(g, cache)

    def f():
        out, _ = multilevel_forward(x, bank, w)
        return float(np.sum(out * g))

    eps = 1e-6
    for arr, grad in ((x, gx), (w, gw)):
        for idx in list(np.ndindex(arr.shape))[::7]:
            old = arr[idx]
            arr[idx] = old + eps
            fp = f()
            arr[idx] = old - eps
            fm = f()
            arr[idx] = old
            assert (fp - fm) / (2 * eps) == pytest.approx(grad[idx], abs=1e-7)


def test_bank_validation():
    with pytest.raises(ShapeError):
        WaveletBank(np.zeros((3, 2, 2)))
    with pytest.raises(ValueError):
        WaveletBank(np.zeros((4, 6, 6)))
    with pytest.raises(ValueError):
        WaveletBank(np.zeros((4, 2, 2)), "bogus")


@settings(max_examples=200, deadline=None)
@given(st.integers(1, 64), st.integers(1, 64), st.integers(0, 2**32 - 1))
def test_recursion_gap_property(h, w, seed):
    x = np.random.default_rng(seed).uniform(-5, 5, size=(h, w))
    assert abs(haar_recursive_approx(x, AVERAGING) - x.mean()) <= 1e-9


@settings(max_examples=50, deadline=None)
@given(st.integers(1, 16), st.integers(1, 16), st.integers(0, 2**32 - 1))
def test_constant_image_has_no_details(h, w, seed):
    c = np.random.default_rng(seed).normal()
    s = dwt2d_matmul(np.full((2 * h, 2 * w), c), HAAR_ORTHONORMAL)
    for band in (s.v, s.h, s.d):
        assert np.max(np.abs(band)) <= 1e-12
