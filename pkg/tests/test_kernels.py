"""Compiled and numpy kernels must agree bit-for-bit up to summation order."""
import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from wavenets import kernels

P = kernels.python_backend
C = kernels.compiled_backend

needs_ext = pytest.mark.skipif(C is None, reason="compiled extension not built")


def test_backend_selected():
    assert kernels.BACKEND in ("compiled", "python")
    if C is not None:
        assert kernels.BACKEND == "compiled" or kernels.os.environ.get("WAVENET_PURE")


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 3), st.integers(1, 4), st.integers(3, 10), st.integers(1, 3), st.integers(1, 2))
def test_im2col_col2im_parity(n, c, size, k, stride):
    r = np.random.default_rng(size * 7 + k)
    x = r.normal(size=(n, c, size, size))
    a, b = P.im2col(x, k, k, stride), C.im2col(x, k, k, stride)
    np.testing.assert_array_equal(a, b)
    np.testing.assert_allclose(P.col2im(a, n, c, size, size, k, k, stride),
                               C.col2im(a, n, c, size, size, k, k, stride), atol=1e-12)


@needs_ext
@settings(max_examples=40, deadline=None)
@given(st.integers(1, 4), st.integers(2, 5), st.integers(5, 12), st.integers(5, 12))
def test_analysis_parity(b, d, h, w):
    r = np.random.default_rng(b + 10 * d + 100 * h + 1000 * w)
    x = r.normal(size=(b, h, w))
    bank = r.normal(size=(4, d, d))
    sub = P.analysis(x, bank)
    np.testing.assert_allclose(sub, C.analysis(x, bank), atol=1e-12)
    g = r.normal(size=sub.shape)
    np.testing.assert_allclose(P.analysis_adjoint(g, bank, h, w), C.analysis_adjoint(g, bank, h, w), atol=1e-12)


@pytest.mark.parametrize("backend", [P] + ([C] if C is not None else []), ids=lambda m: m.__name__)
def test_adjoint_identity(backend):
    # <A x, g> == <x, A^T g> for both kernel pairs
    r = np.random.default_rng(5)
    x = r.normal(size=(2, 3, 9, 9))
    cols = backend.im2col(x, 3, 3, 2)
    g = r.normal(size=cols.shape)
    lhs = np.sum(cols * g)
    rhs = np.sum(x * backend.col2im(g, 2, 3, 9, 9, 3, 3, 2))
    assert abs(lhs - rhs) < 1e-10
    planes = r.normal(size=(3, 11, 11))
    bank = r.normal(size=(4, 3, 3))
    sub = backend.analysis(planes, bank)
    gs = r.normal(size=sub.shape)
    assert abs(np.sum(sub * gs) - np.sum(planes * backend.analysis_adjoint(gs, bank, 11, 11))) < 1e-10
