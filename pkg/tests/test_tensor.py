import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavenets.tensor import (Rng, ShapeError, as_tensor, concat, conv2d, conv2d_backward, matmul,
                             rand_uniform, reduce_mean, reshape, split, take)


def naive_matmul(a, b):
    m, k = a.shape
    _, n = b.shape
    out = np.zeros((m, n))
    for i in range(m):
        for j in range(n):
            for t in range(k):
                out[i, j] += a[i, t] * b[t, j]
    return out


def naive_conv(x, f, stride, groups):
    n, c, h, w = x.shape
    nf, cg, d, _ = f.shape
    ho, wo = (h - d) // stride + 1, (w - d) // stride + 1
    fg = nf // groups
    out = np.zeros((n, nf, ho, wo))
    for b in range(n):
        for o in range(nf):
            g = o // fg
            for k in range(ho):
                for l in range(wo):
                    s = 0.0
                    for ci in range(cg):
                        for i in range(d):
                            for j in range(d):
                                s += f[o, ci, i, j] * x[b, g * cg + ci, k * stride + i, l * stride + j]
                    out[b, o, k, l] = s
    return out


def test_matmul_identity_and_ones():
    m = np.array([[1.0, 2], [3, 4]])
    np.testing.assert_array_equal(matmul(np.eye(2), m), m)
    np.testing.assert_array_equal(matmul(np.ones((2, 2)), np.ones((2, 1))), [[2.0], [2.0]])


def test_matmul_matches_triple_loop(nprng):
    a, b = nprng.normal(size=(5, 4)), nprng.normal(size=(4, 3))
    np.testing.assert_allclose(matmul(a, b), naive_matmul(a, b), atol=1e-12)


def test_matmul_shape_error_names_shapes():
    with pytest.raises(ShapeError, match=r"\(2, 3\).*\(2, 3\)"):
        matmul(np.ones((2, 3)), np.ones((2, 3)))


def test_matmul_associative(nprng):
    for _ in range(20):
        a, b, c = (nprng.normal(size=s) for s in ((4, 5), (5, 6), (6, 3)))
        left, right = matmul(matmul(a, b), c), matmul(a, matmul(b, c))
        assert np.max(np.abs(left - right)) <= 1e-9 * np.max(np.abs(left))


def test_conv2d_hand_value():
    x = np.array([[[[1.0, 2], [3, 4]]]])
    out = conv2d(x, np.full((1, 1, 2, 2), 0.25), stride=2)
    np.testing.assert_allclose(out, [[[[2.5]]]])


def test_conv2d_constant_input_averaging_filter(nprng):
    f = nprng.random((1, 1, 3, 3))
    f /= f.sum()
    out = conv2d(np.full((1, 1, 7, 7), 3.5), f, stride=2)
    np.testing.assert_allclose(out, 3.5, atol=1e-12)


def test_conv2d_grouped_matches_loop_oracle(nprng):
    x = nprng.normal(size=(2, 3, 8, 8))
    f = nprng.normal(size=(12, 1, 2, 2))
    np.testing.assert_allclose(conv2d(x, f, 2, groups=3), naive_conv(x, f, 2, 3), atol=1e-12)
    f_dense = nprng.normal(size=(12, 3, 2, 2))
    np.testing.assert_allclose(conv2d(x, f_dense, 2), naive_conv(x, f_dense, 2, 1), atol=1e-12)


def test_conv2d_depthwise_equals_per_channel(nprng):
    x = nprng.normal(size=(2, 4, 9, 9))
    f = nprng.normal(size=(4, 1, 3, 3))
    grouped = conv2d(x, f, stride=2, groups=4)
    for c in range(4):
        np.testing.assert_allclose(grouped[:, c:c + 1], conv2d(x[:, c:c + 1], f[c:c + 1], stride=2), atol=1e-12)


def test_conv2d_errors():
    with pytest.raises(ShapeError, match="larger than input"):
        conv2d(np.ones((1, 1, 2, 2)), np.ones((1, 1, 3, 3)))
    with pytest.raises(ShapeError, match="groups"):
        conv2d(np.ones((1, 3, 4, 4)), np.ones((4, 1, 2, 2)), groups=2)


def test_conv2d_backward_finite_difference(nprng):
    x = nprng.normal(size=(2, 2, 6, 6))
    f = nprng.normal(size=(3, 2, 3, 3))
    g = nprng.normal(size=(2, 3, 2, 2))
    gx, gw = conv2d_backward(g, x, f, stride=2)
    eps = 1e-6
    for arr, grad in ((x, gx), (f, gw)):
        for idx in [(0, 1, 2, 3), (1, 0, 0, 0), (0, 0, 1, 1)]:
            if len(idx) > arr.ndim or any(i >= s for i, s in zip(idx, arr.shape)):
                continue
            old = arr[idx]
            arr[idx] = old + eps
            fp = np.sum(conv2d(x, f, 2) * g)
            arr[idx] = old - eps
            fm = np.sum(conv2d(x, f, 2) * g)
            arr[idx] = old
            assert abs((fp - fm) / (2 * eps) - grad[idx]) < 1e-6


def test_reduce_mean_and_gap():
    assert reduce_mean(np.array([[1.0, 2], [3, 4]])) == 2.5
    x = np.arange(24.0).reshape(2, 3, 4)
    np.testing.assert_allclose(reduce_mean(x, axis=(1, 2)), x.sum(axis=(1, 2)) / 12, atol=1e-12)
    with pytest.raises(ShapeError):
        reduce_mean(x, axis=3)


def test_concat_split_take():
    v = concat([np.ones(2), np.zeros(3)], axis=0)
    assert v.shape == (5,)
    with pytest.raises(ShapeError):
        concat([np.ones((2, 2)), np.ones((3, 3))], axis=0)
    with pytest.raises(ShapeError):
        concat([np.ones(2)], axis=1)
    parts = split(np.arange(8.0), 4)
    assert [p.tolist() for p in parts] == [[0, 1, 2, 3], [4, 5, 6, 7]]
    np.testing.assert_array_equal(take(np.arange(6.0).reshape(2, 3), 1, 3, axis=1), [[1, 2], [4, 5]])
    assert reshape(np.arange(6.0), [3, 2]).shape == (3, 2)
    with pytest.raises(ShapeError):
        reshape(np.arange(6.0), [4, 2])


def test_rand_uniform_deterministic():
    a = rand_uniform(Rng(7), [4])
    b = rand_uniform(Rng(7), [4])
    np.testing.assert_array_equal(a, b)
    assert not np.array_equal(a, rand_uniform(Rng(8), [4]))
    assert a.dtype == np.float64 and np.all((a >= 0) & (a < 1))


def test_as_tensor_rejects_empty_dims():
    with pytest.raises(ShapeError):
        as_tensor(np.zeros((0, 3)))
    assert as_tensor(3.0).shape == (1,)


@settings(max_examples=30, deadline=None)
@given(st.integers(1, 3), st.integers(1, 3), st.integers(3, 9), st.integers(2, 3), st.integers(1, 2))
def test_conv2d_property_matches_oracle(n, c, size, d, stride):
    r = np.random.default_rng(n * 100 + c * 10 + size)
    x = r.normal(size=(n, c, size, size))
    f = r.normal(size=(2, c, d, d))
    np.testing.assert_allclose(conv2d(x, f, stride), naive_conv(x, f, stride, 1), atol=1e-11)
