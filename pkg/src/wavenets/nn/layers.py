"""Layers with explicit forward/backward passes.

Each layer caches what its backward pass needs during ``forward`` and
writes parameter gradients into ``self.grads`` (same keys as
``self.params``). Containers expose ``leaves()`` so the network can collect
named parameters without a tape.
"""
import numpy as np

from .. import kernels
from ..attention import AttentionBlock


class Layer:
    name = ""
    training = True

    def __init__(self, name=""):
        self.name = name
        self.params = {}
        self.grads = {}
        self.buffers = {}

    def leaves(self):
        yield self

    def __call__(self, x):
        return self.forward(x)


class Conv2d(Layer):
    """Bias-free 2D cross-correlation with zero padding."""

    def __init__(self, in_ch, out_ch, kernel, stride=1, padding=0, rng=None, name=""):
        super().__init__(name)
        self.stride = stride
        self.padding = padding
        self.kernel = kernel
        fan_in = in_ch * kernel * kernel
        w = rng.normal((out_ch, in_ch, kernel, kernel), np.sqrt(2.0 / fan_in)) if rng else np.zeros((out_ch, in_ch, kernel, kernel))
        self.params["weight"] = w

    def forward(self, x):
        w = self.params["weight"]
        p = self.padding
        if p:
            x = np.pad(x, ((0, 0), (0, 0), (p, p), (p, p)))
        n, _, h, wd = x.shape
        k, s = self.kernel, self.stride
        ho, wo = (h - k) // s + 1, (wd - k) // s + 1
        cols = kernels.im2col(x, k, k, s)
        self._cache = (cols, x.shape)
        out = cols @ w.reshape(w.shape[0], -1).T
        return out.reshape(n, ho, wo, -1).transpose(0, 3, 1, 2)

    def backward(self, grad):
        cols, xshape = self._cache
        w = self.params["weight"]
        f = w.shape[0]
        g = grad.transpose(0, 2, 3, 1).reshape(-1, f)
        self.grads["weight"] = (g.T @ cols).reshape(w.shape)
        gx = kernels.col2im(g @ w.reshape(f, -1), xshape, self.kernel, self.kernel, self.stride)
        p = self.padding
        if p:
            gx = gx[:, :, p:-p, p:-p]
        return gx


class BatchNorm2d(Layer):
    def __init__(self, channels, momentum=0.1, eps=1e-5, name=""):
        super().__init__(name)
        self.momentum = momentum
        self.eps = eps
        self.params["gamma"] = np.ones(channels)
        self.params["beta"] = np.zeros(channels)
        self.buffers["running_mean"] = np.zeros(channels)
        self.buffers["running_var"] = np.ones(channels)

    def forward(self, x):
        gamma = self.params["gamma"][None, :, None, None]
        beta = self.params["beta"][None, :, None, None]
        if not self.training:
            mean = self.buffers["running_mean"][None, :, None, None]
            var = self.buffers["running_var"][None, :, None, None]
            return gamma * (x - mean) / np.sqrt(var + self.eps) + beta
        mean = x.mean(axis=(0, 2, 3))
        var = x.var(axis=(0, 2, 3))
        m = x.size // x.shape[1]
        rm, rv = self.buffers["running_mean"], self.buffers["running_var"]
        rm *= 1 - self.momentum
        rm += self.momentum * mean
        rv *= 1 - self.momentum
        rv += self.momentum * var * m / max(m - 1, 1)
        inv = 1.0 / np.sqrt(var + self.eps)
        xhat = (x - mean[None, :, None, None]) * inv[None, :, None, None]
        self._cache = (xhat, inv)
        return gamma * xhat + beta

    def backward(self, grad):
        xhat, inv = self._cache
        self.grads["gamma"] = np.sum(grad * xhat, axis=(0, 2, 3))
        self.grads["beta"] = grad.sum(axis=(0, 2, 3))
        gxhat = grad * self.params["gamma"][None, :, None, None]
        mean_g = gxhat.mean(axis=(0, 2, 3), keepdims=True)
        mean_gx = (gxhat * xhat).mean(axis=(0, 2, 3), keepdims=True)
        return (gxhat - mean_g - xhat * mean_gx) * inv[None, :, None, None]


class ReLU(Layer):
    def forward(self, x):
        self._mask = x > 0
        return x * self._mask

    def backward(self, grad):
        return grad * self._mask


class Linear(Layer):
    def __init__(self, in_features, out_features, rng=None, name=""):
        super().__init__(name)
        scale = np.sqrt(1.0 / in_features)
        self.params["weight"] = rng.normal((out_features, in_features), scale) if rng else np.zeros((out_features, in_features))
        self.params["bias"] = np.zeros(out_features)

    def forward(self, x):
        self._x = x
        return x @ self.params["weight"].T + self.params["bias"]

    def backward(self, grad):
        self.grads["weight"] = grad.T @ self._x
        self.grads["bias"] = grad.sum(axis=0)
        return grad @ self.params["weight"]


class GlobalAvgPool(Layer):
    def forward(self, x):
        self._shape = x.shape
        return x.mean(axis=(2, 3))

    def backward(self, grad):
        n, c, h, w = self._shape
        return np.broadcast_to(grad[:, :, None, None] / (h * w), self._shape).copy()


class Attention(Layer):
    """Adapter exposing an :class:`AttentionBlock` through the layer protocol."""

    def __init__(self, channels, reduction, squeeze_mode, rng=None, assignment=None, name=""):
        super().__init__(name)
        self.block = AttentionBlock(channels, reduction, squeeze_mode, rng, assignment, name)
        self.params = self.block.parameters()

    def forward(self, x):
        return self.block.forward(x).x_scaled

    def backward(self, grad):
        gx = self.block.backward(grad)
        self.grads = self.block.grads
        return gx


class Sequential(Layer):
    def __init__(self, layers, name=""):
        super().__init__(name)
        self.layers = list(layers)

    def leaves(self):
        for layer in self.layers:
            yield from layer.leaves()

    def forward(self, x):
        for layer in self.layers:
            x = layer.forward(x)
        return x

    def backward(self, grad):
        for layer in reversed(self.layers):
            grad = layer.backward(grad)
        return grad


class Residual(Layer):
    """``relu(body(x) + shortcut(x))``; an empty shortcut is the identity."""

    def __init__(self, body, shortcut=None, name=""):
        super().__init__(name)
        self.body = body
        self.shortcut = shortcut
        self.relu = ReLU()

    def leaves(self):
        yield from self.body.leaves()
        if self.shortcut is not None:
            yield from self.shortcut.leaves()

    def forward(self, x):
        skip = x if self.shortcut is None else self.shortcut.forward(x)
        return self.relu.forward(self.body.forward(x) + skip)

    def backward(self, grad):
        g = self.relu.backward(grad)
        gx = self.body.backward(g)
        return gx + (g if self.shortcut is None else self.shortcut.backward(g))


def conv_bn(in_ch, out_ch, kernel, stride, rng, name):
    return [
        Conv2d(in_ch, out_ch, kernel, stride, kernel // 2, rng, f"{name}.conv"),
        BatchNorm2d(out_ch, name=f"{name}.bn"),
    ]


def _shortcut(in_ch, out_ch, stride, rng, name):
    if stride == 1 and in_ch == out_ch:
        return None
    return Sequential(conv_bn(in_ch, out_ch, 1, stride, rng, f"{name}.shortcut"))


def basic_block(in_ch, out_ch, stride, reduction, squeeze_mode, rng, assignment, name):
    body = Sequential(
        conv_bn(in_ch, out_ch, 3, stride, rng, f"{name}.conv1")
        + [ReLU()]
        + conv_bn(out_ch, out_ch, 3, 1, rng, f"{name}.conv2")
        + [Attention(out_ch, reduction, squeeze_mode, rng, assignment, f"att.{name}")]
    )
    return Residual(body, _shortcut(in_ch, out_ch, stride, rng, name), name)


def bottleneck_block(in_ch, mid_ch, stride, reduction, squeeze_mode, rng, assignment, name, expansion=4):
    out_ch = mid_ch * expansion
    body = Sequential(
        conv_bn(in_ch, mid_ch, 1, 1, rng, f"{name}.conv1")
        + [ReLU()]
        + conv_bn(mid_ch, mid_ch, 3, stride, rng, f"{name}.conv2")
        + [ReLU()]
        + conv_bn(mid_ch, out_ch, 1, 1, rng, f"{name}.conv3")
        + [Attention(out_ch, reduction, squeeze_mode, rng, assignment, f"att.{name}")]
    )
    return Residual(body, _shortcut(in_ch, out_ch, stride, rng, name), name)
