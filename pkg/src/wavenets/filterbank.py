"""Random orthonormal filter banks and their channel-group assignment."""
from dataclasses import dataclass, field

import numpy as np

from .wavelet import AVERAGING, ORTHONORMAL, WaveletBank, haar

GROUP_SIZES = (64, 128, 256, 512)
CHUNK = 512
WIDE_SIZES = (1024, 2048)
EXTRA_BANKS = 4
MAX_DRAWS = 5


class GramSchmidtError(ValueError):
    """Input vectors are (numerically) linearly dependent."""


def gram_schmidt(vectors, tol=1e-8):
    """Orthonormalize rows with classical Gram-Schmidt plus one re-orthogonalization pass.

    Raises :class:`GramSchmidtError` if a residual norm drops below ``tol``
    before normalization.
    """
    v = np.array(vectors, dtype=np.float64, ndmin=2)
    k, n = v.shape
    if k > n:
        raise GramSchmidtError(f"cannot orthonormalize {k} vectors in dimension {n}")
    q = np.zeros_like(v)
    for i in range(k):
        r = v[i].copy()
        for _ in range(2):
            r -= q[:i].T @ (q[:i] @ r)
        norm = np.linalg.norm(r)
        if norm < tol:
            raise GramSchmidtError(f"vector {i} is linearly dependent on the previous ones (residual {norm:.3e})")
        q[i] = r / norm
    return q


def haar_bank(mode=ORTHONORMAL):
    return haar(mode)


def random_orthogonal_bank(rng, d=2):
    """Four uniform random d*d vectors, orthonormalized and reshaped to filters.

    The approximation filter is sign-flipped if needed so its entries sum
    to a positive value.
    """
    if d not in (2, 3, 4, 5):
        raise ValueError(f"filter size must be one of 2, 3, 4, 5, got {d}")
    for _ in range(MAX_DRAWS):
        draw = rng.uniform(-1.0, 1.0, (4, d * d))
        try:
            q = gram_schmidt(draw)
        except GramSchmidtError:
            continue
        if q[0].sum() < 0:
            q[0] = -q[0]
        return WaveletBank(q.reshape(4, d, d), ORTHONORMAL)
    raise GramSchmidtError(f"{MAX_DRAWS} consecutive dependent draws; rng state {rng.state}")


def _scaled(sizes, scale):
    if scale < 1 or any(s % scale for s in sizes + (CHUNK,) + WIDE_SIZES):
        raise ValueError(f"scale factor {scale} must be a positive divisor of every group size")
    return tuple(s // scale for s in sizes)


@dataclass
class FilterAssignment:
    """Channel-count to bank mapping.

    ``group_banks`` holds one bank per basic width (64..512, divided by
    ``scale``); ``extra_banks`` serve the 512-channel chunks past the first
    in 1024- and 2048-wide layers: index 0 for 1024, indices 1..3 for 2048.
    """

    group_banks: dict
    extra_banks: list
    d: int = 2
    scale: int = 1
    group_sizes: tuple = field(init=False)

    def __post_init__(self):
        self.group_sizes = _scaled(GROUP_SIZES, self.scale)

    @property
    def chunk(self):
        return CHUNK // self.scale

    @property
    def supported(self):
        return self.group_sizes + _scaled(WIDE_SIZES, self.scale)

    def banks(self):
        return [self.group_banks[s] for s in self.group_sizes] + list(self.extra_banks)

    def chunk_banks(self, channels):
        """Banks to apply to consecutive channel chunks of a ``channels``-wide layer."""
        if channels in self.group_sizes:
            return [self.group_banks[channels]]
        wide = _scaled(WIDE_SIZES, self.scale)
        top = self.group_banks[self.group_sizes[-1]]
        if channels == wide[0]:
            return [top, self.extra_banks[0]]
        if channels == wide[1]:
            return [top] + list(self.extra_banks[1:4])
        raise ValueError(f"no filter assignment for {channels} channels; supported: {self.supported}")

    def named_banks(self):
        names = {f"group{s}": self.group_banks[s] for s in self.group_sizes}
        names.update({f"extra{i}": b for i, b in enumerate(self.extra_banks)})
        return names


def build_assignment(rng, d=2, scale=1):
    """Draw the 4 group banks and 4 extra chunk banks from ``rng`` in a fixed order."""
    sizes = _scaled(GROUP_SIZES, scale)
    group_banks = {s: random_orthogonal_bank(rng, d) for s in sizes}
    extra = [random_orthogonal_bank(rng, d) for _ in range(EXTRA_BANKS)]
    return FilterAssignment(group_banks, extra, d, scale)


def assignment_from_named(named, d, scale):
    """Rebuild an assignment from ``named_banks()`` output."""
    sizes = _scaled(GROUP_SIZES, scale)
    group_banks = {s: named[f"group{s}"] for s in sizes}
    extra = [named[f"extra{i}"] for i in range(EXTRA_BANKS)]
    return FilterAssignment(group_banks, extra, d, scale)


__all__ = [
    "AVERAGING", "ORTHONORMAL", "FilterAssignment", "GramSchmidtError", "build_assignment",
    "gram_schmidt", "haar_bank", "random_orthogonal_bank", "assignment_from_named",
]
