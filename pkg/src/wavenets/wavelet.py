"""2D discrete wavelet transforms.

Two equivalent routes are provided for a 2-tap separable bank: the matrix
form ``W @ X @ W.T`` and the strided convolution form. The convolution
route also handles non-separable d x d banks (d in 2..5). On top of the
single-level transforms sit the multilevel recursion used by the channel
attention squeeze and the mean-padding that keeps the global average
unchanged from level to level.
"""
from dataclasses import dataclass
import math

import numpy as np

from . import kernels
from .tensor import ShapeError, as_tensor, conv2d

ORTHONORMAL = "orthonormal"
AVERAGING = "averaging"
NORM_MODES = (ORTHONORMAL, AVERAGING)
SUBBAND_NAMES = ("a", "v", "h", "d")


@dataclass(frozen=True)
class WaveletBank:
    """Four d x d analysis filters, stacked as ``filters[4, d, d]``.

    Order is approximation, vertical, horizontal, diagonal. ``lowpass`` and
    ``highpass`` hold the 1D filters when the bank is their outer-product
    (separable) construction; only such banks have a matrix form.
    """

    filters: np.ndarray
    norm_mode: str = ORTHONORMAL
    lowpass: np.ndarray = None
    highpass: np.ndarray = None

    def __post_init__(self):
        f = as_tensor(self.filters)
        if f.ndim != 3 or f.shape[0] != 4 or f.shape[1] != f.shape[2]:
            raise ShapeError(f"bank filters must be (4, d, d), got {f.shape}")
        if not 2 <= f.shape[1] <= 5:
            raise ValueError(f"filter size d must be in 2..5, got {f.shape[1]}")
        if self.norm_mode not in NORM_MODES:
            raise ValueError(f"norm_mode must be one of {NORM_MODES}, got {self.norm_mode!r}")
        f.setflags(write=False)
        object.__setattr__(self, "filters", f)

    @classmethod
    def from_1d(cls, lowpass, highpass, norm_mode=ORTHONORMAL):
        h = np.asarray(lowpass, dtype=np.float64)
        g = np.asarray(highpass, dtype=np.float64)
        filters = np.stack([np.outer(h, h), np.outer(h, g), np.outer(g, h), np.outer(g, g)])
        return cls(filters, norm_mode, h, g)

    @property
    def d(self):
        return self.filters.shape[1]

    @property
    def f_a(self):
        return self.filters[0]

    @property
    def f_v(self):
        return self.filters[1]

    @property
    def f_h(self):
        return self.filters[2]

    @property
    def f_d(self):
        return self.filters[3]

    @property
    def separable(self):
        return self.lowpass is not None

    def gram(self):
        """Gram matrix of the four filters flattened to d*d vectors."""
        flat = self.filters.reshape(4, -1)
        return flat @ flat.T

    def orthonormality_error(self):
        return float(np.max(np.abs(self.gram() - np.eye(4))))


_R2 = 1.0 / math.sqrt(2.0)
HAAR_ORTHONORMAL = WaveletBank.from_1d([_R2, _R2], [_R2, -_R2], ORTHONORMAL)
HAAR_AVERAGING = WaveletBank.from_1d([0.5, 0.5], [0.5, -0.5], AVERAGING)


def haar(mode=ORTHONORMAL):
    if mode == ORTHONORMAL:
        return HAAR_ORTHONORMAL
    if mode == AVERAGING:
        return HAAR_AVERAGING
    raise ValueError(f"norm_mode must be one of {NORM_MODES}, got {mode!r}")


@dataclass
class Subbands:
    a: np.ndarray
    v: np.ndarray
    h: np.ndarray
    d: np.ndarray

    def __post_init__(self):
        shapes = {np.shape(s) for s in (self.a, self.v, self.h, self.d)}
        if len(shapes) != 1:
            raise ShapeError(f"subbands must share one shape, got {sorted(shapes)}")

    @classmethod
    def from_stack(cls, stacked):
        return cls(*stacked)

    def stack(self):
        return np.stack([self.a, self.v, self.h, self.d])

    def energies(self):
        return {name: float(np.sum(s * s)) for name, s in zip(SUBBAND_NAMES, self.stack())}

    @property
    def shape(self):
        return np.shape(self.a)


def build_wavelet_matrix(bank, n):
    """Banded analysis matrix: n/2 rows of shifted lowpass, then n/2 of highpass."""
    if n < 2 or n % 2:
        raise ValueError(f"matrix size must be a positive even integer, got {n}")
    if bank.d != 2 or not bank.separable:
        raise ValueError("matrix path needs a separable 2-tap bank")
    m = np.zeros((n, n))
    half = n // 2
    for i in range(half):
        m[i, 2 * i:2 * i + 2] = bank.lowpass
        m[half + i, 2 * i:2 * i + 2] = bank.highpass
    return m


def dwt2d_matmul(x, bank):
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"matrix path takes a single H x W image, got {x.shape}")
    rows, cols = x.shape
    if rows % 2 or cols % 2:
        raise ShapeError(f"matrix path needs even dimensions, got {x.shape}; pad the image first")
    wr = build_wavelet_matrix(bank, rows)
    wc = build_wavelet_matrix(bank, cols)
    y = wr @ x @ wc.T
    hr, hc = rows // 2, cols // 2
    return Subbands(y[:hr, :hc], y[:hr, hc:], y[hr:, :hc], y[hr:, hc:])


def conv_filter_bank(bank, channels):
    """Grouped-convolution weight (4C, 1, d, d): the bank repeated per channel."""
    return np.tile(bank.filters[:, None], (channels, 1, 1, 1))


def dwt2d_conv(x, bank):
    """Single-level DWT of an (N, C, H, W) batch by stride-2 convolution."""
    x = np.asarray(x, dtype=np.float64)
    if x.ndim == 2:
        x = x[None, None]
    if x.ndim != 4:
        raise ShapeError(f"convolution path takes (N, C, H, W), got {x.shape}")
    n, c, h, w = x.shape
    if h < bank.d or w < bank.d:
        raise ShapeError(f"input {h}x{w} smaller than {bank.d}x{bank.d} filters")
    out = kernels.analysis(x.reshape(n * c, h, w), bank.filters)
    return Subbands.from_stack(out.reshape(4, n, c, *out.shape[2:]))


def dwt2d_grouped_conv(x, bank):
    """Reference form of :func:`dwt2d_conv` through the general grouped conv2d."""
    x = np.asarray(x, dtype=np.float64)
    n, c = x.shape[:2]
    y = conv2d(x, conv_filter_bank(bank, c), stride=2, groups=c)
    y = y.reshape(n, c, 4, *y.shape[2:])
    return Subbands(y[:, :, 0], y[:, :, 1], y[:, :, 2], y[:, :, 3])


def idwt2d(s, bank):
    """Inverse of a single-level DWT for an orthonormal 2-tap bank."""
    if bank.norm_mode != ORTHONORMAL:
        raise ValueError("inverse transform requires an orthonormal bank")
    if bank.d != 2:
        raise ValueError("stride-2 transform with d > 2 has no exact inverse")
    if bank.orthonormality_error() > 1e-8:
        raise ValueError("bank filters are not orthonormal")
    stacked = s.stack()
    lead = stacked.shape[1:-2]
    ho, wo = stacked.shape[-2:]
    flat = stacked.reshape(4, -1, ho, wo)
    x = kernels.analysis_adjoint(flat, bank.filters, 2 * ho, 2 * wo)
    return x.reshape(*lead, 2 * ho, 2 * wo)


def padded_size(n, d=2):
    """Smallest m >= max(n, d) such that a stride-2 d-tap pass covers all m samples."""
    m = max(n, d)
    if (m - d) % 2:
        m += 1
    return m


def pad_mean(x, rows, cols):
    """Pad the trailing two axes to (rows, cols) with each image's own mean."""
    h, w = x.shape[-2:]
    if (rows, cols) == (h, w):
        return x
    out = np.empty(x.shape[:-2] + (rows, cols))
    out[...] = x.mean(axis=(-2, -1), keepdims=True)
    out[..., :h, :w] = x
    return out


def pad_mean_adjoint(grad, h, w):
    """Transpose of :func:`pad_mean` as a linear map."""
    rows, cols = grad.shape[-2:]
    if (rows, cols) == (h, w):
        return grad
    g = grad[..., :h, :w].copy()
    fill = grad.sum(axis=(-2, -1), keepdims=True) - g.sum(axis=(-2, -1), keepdims=True)
    return g + fill / (h * w)


def pad_preserving_gap(x):
    """Pad an image to even dimensions without changing its mean.

    Even-sized inputs are returned as-is.
    """
    x = np.asarray(x, dtype=np.float64)
    h, w = x.shape[-2:]
    return pad_mean(x, h + h % 2, w + w % 2)


def num_levels(h, w, d=2):
    """Number of padded stride-2 levels needed to reduce (h, w) to 1 x 1."""
    levels = 0
    while (h, w) != (1, 1):
        h = (padded_size(h, d) - d) // 2 + 1
        w = (padded_size(w, d) - d) // 2 + 1
        levels += 1
    return levels


def multilevel_forward(x, bank, weights=None, levels=None):
    """Batched recursive DWT on (B, H, W).

    Each level mean-pads, runs the four filters and feeds forward either the
    approximation subband or, when ``weights`` is given, the weighted sum of
    all four subbands. Returns the final maps and a cache for
    :func:`multilevel_backward`.
    """
    x = np.asarray(x, dtype=np.float64)
    if levels is None:
        levels = num_levels(*x.shape[-2:], bank.d)
    if levels < 0:
        raise ValueError(f"level count must be non-negative, got {levels}")
    if weights is not None:
        weights = np.asarray(weights, dtype=np.float64)
    cache = []
    cur = x
    for _ in range(levels):
        h, w = cur.shape[-2:]
        padded = pad_mean(cur, padded_size(h, bank.d), padded_size(w, bank.d))
        sub = kernels.analysis(padded, bank.filters)
        cache.append((h, w, padded.shape[-2:], sub if weights is not None else None))
        cur = sub[0] if weights is None else np.tensordot(weights, sub, axes=(0, 0))
    return cur, (bank, weights, cache)


def multilevel_backward(grad, cache):
    """Gradients of :func:`multilevel_forward` w.r.t. its input and weights."""
    bank, weights, levels = cache
    grad_w = None if weights is None else np.zeros(4)
    g = np.asarray(grad, dtype=np.float64)
    for h, w, (ph, pw), sub in reversed(levels):
        if weights is None:
            gsub = np.zeros((4,) + g.shape)
            gsub[0] = g
        else:
            grad_w += np.tensordot(sub, g, axes=(tuple(range(1, sub.ndim)), tuple(range(g.ndim))))
            gsub = weights[:, None, None, None] * g[None]
        g = kernels.analysis_adjoint(gsub, bank.filters, ph, pw)
        g = pad_mean_adjoint(g, h, w)
    return g, grad_w


_KERNEL_CACHE = {}


def effective_kernel(bank, h, w):
    """H x W weights k with ``sum(k * x)`` equal to the full approximation recursion.

    The approximation-only recursion (mean-padding included) is linear in
    the image, so it collapses to one inner product. Built once per
    (bank, h, w) by running the adjoint recursion on a unit gradient.
    """
    key = (bank.filters.tobytes(), h, w)
    k = _KERNEL_CACHE.get(key)
    if k is None:
        _, cache = multilevel_forward(np.zeros((1, h, w)), bank)
        k, _ = multilevel_backward(np.ones((1, 1, 1)), cache)
        k = k[0]
        k.setflags(write=False)
        _KERNEL_CACHE[key] = k
    return k


def dwt_multilevel(x, bank, levels=None, combine_weights=None):
    """Recursive DWT of one image down to its coarsest approximation.

    ``levels`` defaults to the count needed to reach 1 x 1 (log2 of the side
    for power-of-two images and 2-tap filters). Returns a float when the
    result is 1 x 1, otherwise the remaining map.
    """
    if levels is not None and levels < 1:
        raise ValueError(f"level count must be >= 1, got {levels}")
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected a single H x W image, got {x.shape}")
    out, _ = multilevel_forward(x[None], bank, combine_weights, levels)
    out = out[0]
    return float(out[0, 0]) if out.shape == (1, 1) else out


def haar_recursive_approx(x, mode=AVERAGING):
    """Repeated Haar approximation of an image down to a single value.

    In averaging mode this is exactly the global average; in orthonormal
    mode every level contributes a factor of 2.
    """
    x = np.asarray(x, dtype=np.float64)
    if x.ndim != 2:
        raise ShapeError(f"expected a single H x W image, got {x.shape}")
    if x.shape == (1, 1):
        return float(x[0, 0])
    return dwt_multilevel(x, haar(mode))
