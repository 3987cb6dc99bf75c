"""Wavelet channel attention on a small numpy stack."""
from .attention import AttentionBlock, compress_bottleneck, excite, scale, squeeze
from .filterbank import FilterAssignment, build_assignment, gram_schmidt, haar_bank, random_orthogonal_bank
from .kernels import BACKEND
from .tensor import Rng
from .wavelet import (AVERAGING, ORTHONORMAL, Subbands, WaveletBank, build_wavelet_matrix, dwt2d_conv,
                      dwt2d_matmul, dwt_multilevel, haar_recursive_approx, idwt2d, pad_preserving_gap)

__version__ = "0.1.0"

__all__ = [
    "AVERAGING", "BACKEND", "ORTHONORMAL", "AttentionBlock", "FilterAssignment", "Rng", "Subbands",
    "WaveletBank", "build_assignment", "build_wavelet_matrix", "compress_bottleneck", "dwt2d_conv",
    "dwt2d_matmul", "dwt_multilevel", "excite", "gram_schmidt", "haar_bank", "haar_recursive_approx",
    "idwt2d", "pad_preserving_gap", "random_orthogonal_bank", "scale", "squeeze",
]
