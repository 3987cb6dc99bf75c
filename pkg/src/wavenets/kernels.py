"""Kernel backend selection.

The compiled extension is used when it imports cleanly; set
``WAVENET_PURE=1`` to force the numpy fallback. Both backends are exposed
as ``python_backend`` / ``compiled_backend`` so benchmarks and tests can
compare them directly.
"""
import os

import numpy as np

from . import _pykernels as python_backend

try:
    from . import _ckernels as compiled_backend
except ImportError:  # extension not built
    compiled_backend = None

if compiled_backend is not None and not os.environ.get("WAVENET_PURE"):
    _impl = compiled_backend
    BACKEND = "compiled"
else:
    _impl = python_backend
    BACKEND = "python"


def _c(a):
    return np.ascontiguousarray(a, dtype=np.float64)


def im2col(x, kh, kw, stride):
    return _impl.im2col(_c(x), kh, kw, stride)


def col2im(cols, shape, kh, kw, stride):
    n, c, h, w = shape
    return _impl.col2im(_c(cols), n, c, h, w, kh, kw, stride)


def analysis(x, bank):
    return _impl.analysis(_c(x), _c(bank))


def analysis_adjoint(g, bank, h, w):
    return _impl.analysis_adjoint(_c(g), _c(bank), h, w)
