"""Squeeze / excite / scale channel attention with hand-written backward passes.

Squeeze modes:

``gap``
    per-channel spatial mean.
``haar``
    recursive Haar approximation in averaging normalization; numerically
    the same as ``gap``.

The approximation-only modes (``haar``, ``wavenet_c``) are linear in each
channel, so they run as one inner product with a cached effective kernel
(see :func:`~wavenets.wavelet.effective_kernel`).
``wavenet``
    recursive averaging Haar where each level feeds forward a trainable
    weighted sum of the four subbands (weights start at (1, 0, 0, 0)).
``wavenet_c``
    recursive approximation under random orthonormal banks drawn from a
    :class:`~wavenets.filterbank.FilterAssignment`; layers wider than the
    chunk size are split and each chunk gets its own bank.
"""
from dataclasses import dataclass

import numpy as np

from .tensor import ShapeError
from .wavelet import HAAR_AVERAGING, effective_kernel, multilevel_backward, multilevel_forward

SQUEEZE_MODES = ("gap", "haar", "wavenet", "wavenet_c")
WAVELET_MODES = ("haar", "wavenet", "wavenet_c")


def sigmoid(x):
    out = np.empty_like(x)
    pos = x >= 0
    out[pos] = 1.0 / (1.0 + np.exp(-x[pos]))
    e = np.exp(x[~pos])
    out[~pos] = e / (1.0 + e)
    return out


def compress_bottleneck(x, assignment):
    """Per-channel orthonormal wavelet compression, chunked for wide layers."""
    z, _ = _compress_forward(np.asarray(x, dtype=np.float64), assignment)
    return z


def _compress_forward(x, assignment):
    n, c, h, w = x.shape
    banks = assignment.chunk_banks(c)
    size = c // len(banks)
    kernels = [effective_kernel(bank, h, w) for bank in banks]
    z = np.concatenate(
        [np.einsum("nchw,hw->nc", x[:, i * size:(i + 1) * size], k) for i, k in enumerate(kernels)], axis=1)
    return z, (x.shape, size, kernels)


def _compress_backward(gz, cache):
    (n, c, h, w), size, kernels = cache
    gx = np.empty((n, c, h, w))
    for i, k in enumerate(kernels):
        gx[:, i * size:(i + 1) * size] = gz[:, i * size:(i + 1) * size, None, None] * k
    return gx


def _squeeze_forward(x, mode, combine_weights=None, assignment=None):
    if x.ndim != 4:
        raise ShapeError(f"attention input must be (N, C, H, W), got {x.shape}")
    n, c, h, w = x.shape
    if mode == "gap":
        return x.mean(axis=(2, 3)), (mode, x.shape, None)
    if mode not in SQUEEZE_MODES:
        raise ValueError(f"unknown squeeze mode {mode!r}; expected one of {SQUEEZE_MODES}")
    if h != w:
        raise ShapeError(f"{mode} squeeze needs square feature maps, got {h}x{w}")
    if mode == "wavenet_c":
        if assignment is None:
            raise ValueError("wavenet_c squeeze needs a filter assignment")
        z, cache = _compress_forward(x, assignment)
        return z, (mode, x.shape, cache)
    if mode == "haar":
        k = effective_kernel(HAAR_AVERAGING, h, w)
        return np.einsum("nchw,hw->nc", x, k), (mode, x.shape, k)
    out, cache = multilevel_forward(x.reshape(n * c, h, w), HAAR_AVERAGING, combine_weights)
    return out.reshape(n, c), (mode, x.shape, cache)


def _squeeze_backward(gz, cache):
    mode, shape, inner = cache
    n, c, h, w = shape
    if mode == "gap":
        return np.broadcast_to(gz[:, :, None, None] / (h * w), shape).copy(), None
    if mode == "wavenet_c":
        return _compress_backward(gz, inner), None
    if mode == "haar":
        return gz[:, :, None, None] * inner, None
    gx, gw = multilevel_backward(gz.reshape(n * c, 1, 1), inner)
    return gx.reshape(shape), gw


def squeeze(x, block):
    z, _ = _squeeze_forward(np.asarray(x, dtype=np.float64), block.squeeze_mode,
                            block.combine_weights, block.assignment)
    return z


def excite(z, block):
    """sigmoid(w2 @ relu(w1 @ z)) for every row of ``z``."""
    z = np.asarray(z, dtype=np.float64)
    return sigmoid(np.maximum(z @ block.w1.T, 0.0) @ block.w2.T)


def scale(x, att):
    x = np.asarray(x, dtype=np.float64)
    att = np.asarray(att, dtype=np.float64)
    if att.shape != x.shape[:2]:
        raise ShapeError(f"attention shape {att.shape} does not match input channels {x.shape[:2]}")
    return x * att[:, :, None, None]


@dataclass
class AttentionOutput:
    att: np.ndarray
    x_scaled: np.ndarray


class AttentionBlock:
    """Channel attention unit with a fixed squeeze mode.

    Trainable parameters are ``w1`` (C/r x C), ``w2`` (C x C/r) and, in
    ``wavenet`` mode only, the four ``combine_weights``. Wavelet banks are
    constants and never appear in :meth:`parameters`.
    """

    def __init__(self, channels, reduction=16, squeeze_mode="gap", rng=None, assignment=None, name="att"):
        if squeeze_mode not in SQUEEZE_MODES:
            raise ValueError(f"unknown squeeze mode {squeeze_mode!r}; expected one of {SQUEEZE_MODES}")
        if reduction < 1 or channels % reduction:
            raise ValueError(f"channels ({channels}) must be divisible by reduction ratio ({reduction})")
        if squeeze_mode == "wavenet_c":
            if assignment is None:
                raise ValueError("wavenet_c mode needs a filter assignment")
            assignment.chunk_banks(channels)
        self.channels = channels
        self.reduction = reduction
        self.squeeze_mode = squeeze_mode
        self.assignment = assignment
        self.name = name
        hidden = channels // reduction
        if rng is None:
            self.w1 = np.zeros((hidden, channels))
            self.w2 = np.zeros((channels, hidden))
        else:
            self.w1 = rng.normal((hidden, channels), np.sqrt(2.0 / channels))
            self.w2 = rng.normal((channels, hidden), np.sqrt(1.0 / hidden))
        self.combine_weights = np.array([1.0, 0.0, 0.0, 0.0]) if squeeze_mode == "wavenet" else None
        self.grads = {}
        self._saved = None

    def parameters(self):
        params = {"w1": self.w1, "w2": self.w2}
        if self.combine_weights is not None:
            params["combine_weights"] = self.combine_weights
        return params

    def num_parameters(self):
        return sum(p.size for p in self.parameters().values())

    def forward(self, x):
        x = np.asarray(x, dtype=np.float64)
        z, sq_cache = _squeeze_forward(x, self.squeeze_mode, self.combine_weights, self.assignment)
        pre = z @ self.w1.T
        hidden = np.maximum(pre, 0.0)
        att = sigmoid(hidden @ self.w2.T)
        self._saved = (x, z, pre, hidden, att, sq_cache)
        return AttentionOutput(att, scale(x, att))

    def __call__(self, x):
        return self.forward(x).x_scaled

    def backward(self, grad_out, detach_squeeze=False):
        """Return the input gradient and store parameter gradients in ``grads``.

        With ``detach_squeeze`` the attention vector is treated as a constant
        and only the direct ``att * grad_out`` term reaches the input.
        """
        if self._saved is None:
            raise RuntimeError(f"{self.name}: backward called without a saved forward pass")
        x, z, pre, hidden, att, sq_cache = self._saved
        grad_x = grad_out * att[:, :, None, None]
        grad_att = np.einsum("nchw,nchw->nc", grad_out, x)
        grad_logit = grad_att * att * (1.0 - att)
        self.grads = {"w2": grad_logit.T @ hidden}
        grad_pre = (grad_logit @ self.w2) * (pre > 0)
        self.grads["w1"] = grad_pre.T @ z
        if self.combine_weights is not None:
            self.grads["combine_weights"] = np.zeros(4)
        if detach_squeeze:
            return grad_x
        gx_sq, gw = _squeeze_backward(grad_pre @ self.w1, sq_cache)
        if gw is not None:
            self.grads["combine_weights"] = gw
        return grad_x + gx_sq
