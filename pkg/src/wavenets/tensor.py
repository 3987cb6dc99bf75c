"""Dense float64 tensor helpers.

Tensors are plain C-contiguous ``numpy.ndarray`` objects of dtype float64;
this module adds the handful of shape-checked operations the rest of the
package is written against, plus a seeded random generator.
"""
import numpy as np

from . import kernels


class ShapeError(ValueError):
    """Raised when operand shapes are incompatible."""


def as_tensor(data):
    """Return ``data`` as a C-contiguous float64 array with at least one dim."""
    t = np.ascontiguousarray(data, dtype=np.float64)
    if t.ndim == 0:
        t = t.reshape(1)
    if any(s < 1 for s in t.shape):
        raise ShapeError(f"every dimension must be >= 1, got {t.shape}")
    return t


class Rng:
    """Seeded sample stream.

    Backed by numpy's PCG64 bit generator, whose output for a given seed is
    fixed across platforms and numpy releases. ``state`` exposes the
    bit-generator state for error reports.
    """

    def __init__(self, seed=0):
        self.seed = int(seed)
        self._gen = np.random.Generator(np.random.PCG64(self.seed))

    @property
    def state(self):
        return self._gen.bit_generator.state

    def uniform(self, low, high, dims):
        return self._gen.uniform(low, high, size=tuple(dims))

    def normal(self, dims, scale=1.0):
        return self._gen.normal(0.0, scale, size=tuple(dims))

    def integers(self, low, high, size=None):
        return self._gen.integers(low, high, size=size)

    def permutation(self, n):
        return self._gen.permutation(n)

    def spawn(self):
        """Child generator seeded from this stream."""
        return Rng(int(self._gen.integers(0, 2**63 - 1)))


def rand_uniform(rng, dims, low=0.0, high=1.0):
    return as_tensor(rng.uniform(low, high, dims))


def matmul(a, b):
    a = np.asarray(a, dtype=np.float64)
    b = np.asarray(b, dtype=np.float64)
    if a.ndim != 2 or b.ndim != 2 or a.shape[1] != b.shape[0]:
        raise ShapeError(f"matmul shape mismatch: {a.shape} x {b.shape}")
    return a @ b


def conv_output_size(size, k, stride):
    return (size - k) // stride + 1


def conv2d(x, filters, stride=1, groups=1):
    """Strided grouped 2D cross-correlation without padding.

    ``x`` is (N, C, H, W), ``filters`` is (F, C/groups, d, d). Output
    element ``[n, f, k, l]`` is ``sum(filters[f] * x[n, group(f), k*s:k*s+d,
    l*s:l*s+d])``; kernels are not flipped.
    """
    x = np.asarray(x, dtype=np.float64)
    filters = np.asarray(filters, dtype=np.float64)
    if x.ndim != 4 or filters.ndim != 4:
        raise ShapeError(f"conv2d expects 4-d input and filters, got {x.shape} and {filters.shape}")
    n, c, h, w = x.shape
    f, cg, kh, kw = filters.shape
    if stride < 1:
        raise ValueError(f"stride must be >= 1, got {stride}")
    if groups < 1 or c % groups or f % groups:
        raise ShapeError(f"groups={groups} must divide input channels {c} and filters {f}")
    if cg != c // groups:
        raise ShapeError(f"filters expect {cg} channels per group, input gives {c // groups}")
    if kh > h or kw > w:
        raise ShapeError(f"kernel {kh}x{kw} larger than input {h}x{w}")
    ho = conv_output_size(h, kh, stride)
    wo = conv_output_size(w, kw, stride)
    fg = f // groups
    out = np.empty((n, f, ho, wo))
    for g in range(groups):
        xs = x[:, g * cg:(g + 1) * cg]
        cols = kernels.im2col(xs, kh, kw, stride)
        wmat = filters[g * fg:(g + 1) * fg].reshape(fg, -1)
        out[:, g * fg:(g + 1) * fg] = (cols @ wmat.T).reshape(n, ho, wo, fg).transpose(0, 3, 1, 2)
    return out


def conv2d_backward(grad_out, x, filters, stride=1):
    """Gradients of an ungrouped :func:`conv2d` w.r.t. input and filters."""
    n, c, h, w = x.shape
    f, _, kh, kw = filters.shape
    cols = kernels.im2col(x, kh, kw, stride)
    g = grad_out.transpose(0, 2, 3, 1).reshape(-1, f)
    grad_w = (g.T @ cols).reshape(filters.shape)
    grad_cols = g @ filters.reshape(f, -1)
    grad_x = kernels.col2im(grad_cols, x.shape, kh, kw, stride)
    return grad_x, grad_w


def _check_axis(t, axis):
    if not -t.ndim <= axis < t.ndim:
        raise ShapeError(f"axis {axis} out of range for tensor of rank {t.ndim}")


def reduce_mean(t, axis=None):
    t = np.asarray(t, dtype=np.float64)
    if axis is not None:
        for ax in np.atleast_1d(axis):
            _check_axis(t, int(ax))
        axis = tuple(int(a) for a in np.atleast_1d(axis))
    return t.mean(axis=axis)


def reshape(t, dims):
    t = np.asarray(t, dtype=np.float64)
    dims = tuple(int(d) for d in dims)
    if int(np.prod(dims)) != t.size:
        raise ShapeError(f"cannot reshape {t.shape} ({t.size} values) to {dims}")
    return t.reshape(dims)


def concat(tensors, axis=0):
    tensors = [np.asarray(t, dtype=np.float64) for t in tensors]
    if not tensors:
        raise ShapeError("concat needs at least one tensor")
    _check_axis(tensors[0], axis)
    ref = list(tensors[0].shape)
    for t in tensors[1:]:
        other = list(t.shape)
        if len(other) != len(ref) or any(a != b for i, (a, b) in enumerate(zip(ref, other)) if i != axis % len(ref)):
            raise ShapeError(f"concat shape mismatch: {tuple(ref)} vs {t.shape} along axis {axis}")
    return np.concatenate(tensors, axis=axis)


def split(t, size, axis=0):
    """Split ``t`` into consecutive chunks of ``size`` along ``axis``."""
    t = np.asarray(t)
    _check_axis(t, axis)
    n = t.shape[axis]
    if n % size:
        raise ShapeError(f"axis length {n} not divisible by chunk size {size}")
    return np.split(t, n // size, axis=axis)


def take(t, start, stop, axis=0):
    t = np.asarray(t)
    _check_axis(t, axis)
    idx = [slice(None)] * t.ndim
    idx[axis] = slice(start, stop)
    return t[tuple(idx)]


def add(a, b):
    return np.add(a, b, dtype=np.float64)


def mul(a, b):
    return np.multiply(a, b, dtype=np.float64)


def scale(a, s):
    return np.multiply(a, float(s), dtype=np.float64)
