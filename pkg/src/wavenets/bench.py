"""Timing helpers for ``wavenets bench`` and ``benchmarks/bench_kernels.py``."""
import time

import numpy as np

from . import kernels
from .attention import _squeeze_forward
from .filterbank import build_assignment
from .nn.model import ModelConfig, build_classifier
from .tensor import Rng
from .wavelet import HAAR_ORTHONORMAL, dwt2d_conv, dwt2d_matmul


def best_of(fn, repeat=5, number=1):
    """Best mean wall time per call over ``repeat`` rounds of ``number`` calls."""
    fn()
    best = float("inf")
    for _ in range(repeat):
        t0 = time.perf_counter()
        for _ in range(number):
            fn()
        best = min(best, (time.perf_counter() - t0) / number)
    return best


def kernel_rows(sizes=(16, 32, 64), batch=16, channels=8, repeat=5):
    """Compare the numpy and compiled backends on each hot kernel."""
    backends = [("python", kernels.python_backend)]
    if kernels.compiled_backend is not None:
        backends.append(("compiled", kernels.compiled_backend))
    rng = Rng(0)
    bank = np.ascontiguousarray(HAAR_ORTHONORMAL.filters)
    rows = []
    for size in sizes:
        x = rng.normal((batch, channels, size + 2, size + 2))
        cols = kernels.python_backend.im2col(x, 3, 3, 1)
        planes = rng.normal((batch * channels, size, size))
        sub = kernels.python_backend.analysis(planes, bank)
        cases = {
            "im2col": lambda m: m.im2col(x, 3, 3, 1),
            "col2im": lambda m: m.col2im(cols, batch, channels, size + 2, size + 2, 3, 3, 1),
            "analysis": lambda m: m.analysis(planes, bank),
            "analysis_adjoint": lambda m: m.analysis_adjoint(sub, bank, size, size),
        }
        for kernel, call in cases.items():
            times = {name: best_of(lambda m=m: call(m), repeat) for name, m in backends}
            rows.append({"kernel": kernel, "size": size, **times})
    return rows


def dwt_path_rows(sizes=(16, 32, 64), repeat=5):
    rng = Rng(1)
    rows = []
    for size in sizes:
        x = rng.normal((size, size))
        rows.append({
            "size": size,
            "matmul": best_of(lambda: dwt2d_matmul(x, HAAR_ORTHONORMAL), repeat),
            "conv": best_of(lambda: dwt2d_conv(x, HAAR_ORTHONORMAL), repeat),
        })
    return rows


def squeeze_rows(sizes=(8, 16, 32), batch=32, channels=64, repeat=5):
    """Squeeze cost of every mode relative to GAP on (batch, channels, s, s) input."""
    rng = Rng(2)
    assignment = build_assignment(rng.spawn(), 2, scale=8)
    rows = []
    for size in sizes:
        x = rng.normal((batch, channels, size, size))
        times = {}
        for mode in ("gap", "haar", "wavenet", "wavenet_c"):
            w = np.array([1.0, 0.0, 0.0, 0.0]) if mode == "wavenet" else None
            times[mode] = best_of(lambda m=mode, w=w: _squeeze_forward(x, m, w, assignment), repeat)
        rows.append({"size": size, **times})
    return rows


def network_overhead(batch=32, repeat=3, scale_factor=8):
    """Forward time of the classifier with wavenet_c attention relative to gap attention."""
    x = Rng(3).normal((batch, 1, 32, 32))
    times = {}
    for mode in ("gap", "wavenet_c"):
        net = build_classifier(ModelConfig(squeeze_mode=mode, scale_factor=scale_factor)).eval()
        times[mode] = best_of(lambda: net.forward(x), repeat)
    times["overhead_pct"] = 100.0 * (times["wavenet_c"] - times["gap"]) / times["gap"]
    return times


def format_table(rows, unit="ms"):
    if not rows:
        return ""
    keys = list(rows[0])
    out = ["\t".join(keys)]
    for row in rows:
        cells = []
        for k in keys:
            v = row[k]
            cells.append(f"{v * 1e3:.4f}" if isinstance(v, float) else str(v))
        out.append("\t".join(cells))
    return "\n".join(out) + f"\n(times in {unit})"
