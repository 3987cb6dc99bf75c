"""Property suite behind ``wavenets verify``.

Each check returns a :class:`CheckResult`; ``run_all`` strings them
together. Tolerances are module constants so tests and the CLI agree.
"""
from dataclasses import dataclass

import numpy as np

from . import gradcheck
from .attention import SQUEEZE_MODES
from .filterbank import random_orthogonal_bank
from .nn.model import ModelConfig, build_classifier
from .tensor import Rng
from .wavelet import (AVERAGING, HAAR_ORTHONORMAL, ORTHONORMAL, dwt2d_conv, dwt2d_matmul,
                      haar_recursive_approx, idwt2d, num_levels)

RECURSION_TOL = 1e-9
RECURSION_ORTHO_RTOL = 1e-8
CROSS_PATH_TOL = 1e-10
GRAM_TOL = 1e-10
PARSEVAL_RTOL = 1e-8
RECON_TOL = 1e-8
BLOCK_GRAD_TOL = 1e-6
NET_GRAD_TOL = 1e-5


@dataclass
class CheckResult:
    name: str
    passed: bool
    detail: str

    def line(self):
        return f"[{'PASS' if self.passed else 'FAIL'}] {self.name}: {self.detail}"


def recursion_gap(n=1000, seed=0, max_side=64):
    """Averaging Haar recursion equals the mean on random H x W images."""
    rng = Rng(seed)
    worst = 0.0
    for _ in range(n):
        h, w = (int(v) for v in rng.integers(1, max_side + 1, 2))
        x = rng.uniform(-1.0, 1.0, (h, w))
        worst = max(worst, abs(haar_recursive_approx(x, AVERAGING) - x.mean()))
    return CheckResult("recursion-mean", worst <= RECURSION_TOL,
                       f"max |recursion - mean| = {worst:.2e} over {n} images (tol {RECURSION_TOL:g})")


def recursion_orthonormal(n=100, seed=1):
    """Orthonormal Haar recursion equals 2**J times the mean for power-of-two sides."""
    rng = Rng(seed)
    worst = 0.0
    for _ in range(n):
        j = int(rng.integers(1, 7))
        side = 2 ** j
        x = rng.uniform(0.1, 1.0, (side, side))
        expected = 2.0 ** num_levels(side, side) * x.mean()
        worst = max(worst, abs(haar_recursive_approx(x, ORTHONORMAL) - expected) / abs(expected))
    return CheckResult("recursion-orthonormal", worst <= RECURSION_ORTHO_RTOL,
                       f"max relative error vs 2^J*mean = {worst:.2e} (tol {RECURSION_ORTHO_RTOL:g})")


def cross_path(n=100, seed=2):
    rng = Rng(seed)
    worst = 0.0
    for _ in range(n):
        h, w = (2 * int(v) for v in rng.integers(1, 33, 2))
        x = rng.normal((h, w))
        m = dwt2d_matmul(x, HAAR_ORTHONORMAL).stack()
        c = dwt2d_conv(x, HAAR_ORTHONORMAL).stack()[:, 0, 0]
        worst = max(worst, float(np.max(np.abs(m - c))))
    return CheckResult("cross-path", worst <= CROSS_PATH_TOL,
                       f"max |matmul - conv| = {worst:.2e} over {n} inputs (tol {CROSS_PATH_TOL:g})")


def orthonormality(seeds=100, ds=(2, 3, 4, 5), banks=None):
    """Gram matrices of random banks (or of the supplied ``banks``) equal I4."""
    if banks is None:
        banks = [random_orthogonal_bank(Rng(s), d) for d in ds for s in range(seeds)]
        what = f"{seeds} seeds x d in {tuple(ds)}"
    else:
        banks = list(banks)
        what = f"{len(banks)} supplied banks"
    worst = max(b.orthonormality_error() for b in banks)
    return CheckResult("orthonormality", worst <= GRAM_TOL,
                       f"max |Gram - I| = {worst:.2e} for {what} (tol {GRAM_TOL:g})")


def parseval(seeds=100, size=8):
    """Subband energy equals input energy for orthonormal 2-tap banks."""
    worst = 0.0
    for s in range(seeds):
        rng = Rng(10_000 + s)
        bank = random_orthogonal_bank(rng, 2)
        x = rng.normal((size, size))
        e = sum(dwt2d_conv(x, bank).energies().values())
        worst = max(worst, abs(e - np.sum(x * x)) / np.sum(x * x))
    return CheckResult("parseval", worst <= PARSEVAL_RTOL,
                       f"max relative energy error = {worst:.2e} over {seeds} banks, d=2 (tol {PARSEVAL_RTOL:g})")


def reconstruction(n=100, size=16, seed=3):
    rng = Rng(seed)
    worst = 0.0
    for i in range(n):
        bank = HAAR_ORTHONORMAL if i % 2 == 0 else random_orthogonal_bank(rng, 2)
        x = rng.normal((size, size))
        worst = max(worst, float(np.max(np.abs(idwt2d(dwt2d_conv(x, bank), bank)[0, 0] - x))))
    return CheckResult("reconstruction", worst <= RECON_TOL,
                       f"max |idwt(dwt(x)) - x| = {worst:.2e} over {n} inputs (tol {RECON_TOL:g})")


def gradients(seeds=5):
    block_worst, net_worst = 0.0, 0.0
    for mode in SQUEEZE_MODES:
        for s in range(seeds):
            block_worst = max(block_worst, max(gradcheck.check_attention_block(mode, s).values()))
            net_worst = max(net_worst, max(gradcheck.check_micro_net(mode, s).values()))
    ok = block_worst <= BLOCK_GRAD_TOL and net_worst <= NET_GRAD_TOL
    return CheckResult("gradients", ok,
                       f"attention block {block_worst:.2e} (tol {BLOCK_GRAD_TOL:g}), "
                       f"micro-net {net_worst:.2e} (tol {NET_GRAD_TOL:g}), {seeds} seeds x 4 modes")


def census_parity(scale_factor=8, block="basic"):
    counts = {}
    blocks = 0
    for mode in SQUEEZE_MODES:
        net = build_classifier(ModelConfig(squeeze_mode=mode, scale_factor=scale_factor, block=block))
        counts[mode] = net.num_parameters()
        blocks = len(net.attention_layers())
    ok = (counts["wavenet_c"] == counts["gap"] == counts["haar"]
          and counts["wavenet"] == counts["gap"] + 4 * blocks)
    detail = ", ".join(f"{m}={c}" for m, c in counts.items()) + f"; {blocks} attention blocks"
    return CheckResult("census-parity", ok, detail)


def run_all(seeds=100, banks=None, quick=False):
    """Run every check; ``seeds`` scales the randomized sweeps."""
    n_img = max(seeds * 10, 1000)
    grad_seeds = 1 if quick else 5
    checks = [
        lambda: recursion_gap(n_img),
        lambda: recursion_orthonormal(seeds),
        lambda: cross_path(seeds),
        lambda: orthonormality(seeds, banks=banks),
        lambda: parseval(seeds),
        lambda: reconstruction(seeds),
        lambda: gradients(grad_seeds),
        lambda: census_parity(),
    ]
    return [c() for c in checks]

