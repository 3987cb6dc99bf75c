"""Pure numpy implementations of the hot kernels.

Every function here has a twin with the same signature in the compiled
``_ckernels`` extension; ``wavenets.kernels`` picks one at import time.
"""
import numpy as np
from numpy.lib.stride_tricks import sliding_window_view


def im2col(x, kh, kw, stride):
    """Unfold ``x`` (N, C, H, W) into rows of patches.

    Returns an array of shape (N*Ho*Wo, C*kh*kw); column order is
    (channel, kernel row, kernel col) so that a weight tensor of shape
    (F, C, kh, kw) reshaped to (F, C*kh*kw) lines up with it.
    """
    n, c, h, w = x.shape
    ho = (h - kh) // stride + 1
    wo = (w - kw) // stride + 1
    win = sliding_window_view(x, (kh, kw), axis=(2, 3))[:, :, ::stride, ::stride][:, :, :ho, :wo]
    # (N, C, Ho, Wo, kh, kw) -> (N, Ho, Wo, C, kh, kw)
    cols = np.ascontiguousarray(win.transpose(0, 2, 3, 1, 4, 5))
    return cols.reshape(n * ho * wo, c * kh * kw)


def col2im(cols, n, c, h, w, kh, kw, stride):
    """Adjoint of :func:`im2col`: scatter-add patch rows back into an image."""
    ho = (h - kh) // stride + 1
    wo = (w - kw) // stride + 1
    cols = cols.reshape(n, ho, wo, c, kh, kw)
    out = np.zeros((n, c, h, w))
    for i in range(kh):
        for j in range(kw):
            out[:, :, i:i + stride * ho:stride, j:j + stride * wo:stride] += (
                cols[:, :, :, :, i, j].transpose(0, 3, 1, 2)
            )
    return out


def analysis(x, bank):
    """One stride-2 filter-bank level: (B, H, W) -> (4, B, Ho, Wo)."""
    d = bank.shape[-1]
    b, h, w = x.shape
    ho = (h - d) // 2 + 1
    wo = (w - d) // 2 + 1
    if d == 2 and h % 2 == 0 and w % 2 == 0:
        blocks = x.reshape(b, ho, 2, wo, 2)
        return np.einsum("bhiwj,kij->kbhw", blocks, bank, optimize=True)
    win = sliding_window_view(x, (d, d), axis=(1, 2))[:, ::2, ::2][:, :ho, :wo]
    return np.einsum("bhwij,kij->kbhw", win, bank, optimize=True)


def analysis_adjoint(g, bank, h, w):
    """Transpose of :func:`analysis`: (4, B, Ho, Wo) -> (B, H, W)."""
    d = bank.shape[-1]
    _, b, ho, wo = g.shape
    if d == 2 and h == 2 * ho and w == 2 * wo:
        blocks = np.einsum("kbhw,kij->bhiwj", g, bank, optimize=True)
        return blocks.reshape(b, h, w)
    out = np.zeros((b, h, w))
    for i in range(d):
        for j in range(d):
            out[:, i:i + 2 * ho:2, j:j + 2 * wo:2] += np.tensordot(bank[:, i, j], g, axes=(0, 0))
    return out
