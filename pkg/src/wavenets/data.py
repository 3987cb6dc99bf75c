"""Synthetic grating datasets and IDX raster files."""
from dataclasses import dataclass, field
import math
import struct

import numpy as np

from .tensor import Rng

IMAGE_SIZE = 32
NOISE = 0.3

# (cycles per image, orientation) per class; horizontal/vertical pairs first so
# neighbouring classes load different Haar detail subbands.
GRATINGS = (
    (3.0, 0.0), (3.0, math.pi / 2), (6.0, 0.0), (6.0, math.pi / 2),
    (3.0, math.pi / 4), (3.0, 3 * math.pi / 4), (6.0, math.pi / 4), (6.0, 3 * math.pi / 4),
)


class IDXFormatError(ValueError):
    def __init__(self, message, offset):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


@dataclass
class Dataset:
    images: np.ndarray
    labels: np.ndarray
    num_classes: int
    meta: dict = field(default_factory=dict)

    def __post_init__(self):
        self.images = np.asarray(self.images, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.images.ndim != 4:
            raise ValueError(f"images must be (N, C, H, W), got {self.images.shape}")
        if len(self.labels) != len(self.images):
            raise ValueError(f"{len(self.images)} images but {len(self.labels)} labels")
        if len(self.labels) and (self.labels.min() < 0 or self.labels.max() >= self.num_classes):
            raise ValueError(f"labels must lie in [0, {self.num_classes})")

    def __len__(self):
        return len(self.labels)

    def class_counts(self):
        return np.bincount(self.labels, minlength=self.num_classes)


def synth_textures(seed, n, num_classes, size=IMAGE_SIZE):
    """Noisy sinusoidal gratings, one (frequency, orientation) pair per class.

    Labels cycle through the classes so counts are balanced to within one.
    Each image gets a random phase and uniform noise of amplitude 0.3; pixels
    are clipped to [0, 1].
    """
    if not 2 <= num_classes <= len(GRATINGS):
        raise ValueError(f"class count must be in [2, {len(GRATINGS)}], got {num_classes}")
    if n < 10 * num_classes:
        raise ValueError(f"need at least {10 * num_classes} samples for {num_classes} classes, got {n}")
    rng = Rng(seed)
    labels = np.arange(n) % num_classes
    labels = labels[rng.permutation(n)]
    yy, xx = np.mgrid[0:size, 0:size] / size
    phases = rng.uniform(0.0, 2 * math.pi, (n,))
    noise = rng.uniform(-NOISE, NOISE, (n, size, size))
    images = np.empty((n, 1, size, size))
    for i, (k, phase) in enumerate(zip(labels, phases)):
        cycles, theta = GRATINGS[k]
        wave = np.sin(2 * math.pi * cycles * (xx * math.cos(theta) + yy * math.sin(theta)) + phase)
        images[i, 0] = np.clip(0.5 + 0.35 * wave + noise[i], 0.0, 1.0)
    return Dataset(images, labels, num_classes, {"source": "synthetic", "seed": seed})


def normalize(ds, mean=None, std=None):
    """Return a copy with ``(x - mean) / std``; defaults to the dataset's own statistics."""
    mean = ds.images.mean() if mean is None else mean
    std = ds.images.std() if std is None else std
    if std <= 0:
        raise ValueError("standard deviation must be positive")
    meta = dict(ds.meta, mean=float(mean), std=float(std))
    return Dataset((ds.images - mean) / std, ds.labels.copy(), ds.num_classes, meta)


def split(ds, ratio=0.8, seed=0):
    """Stratified split: each class contributes ``round(ratio * count)`` to train."""
    if not 0 < ratio < 1:
        raise ValueError(f"split ratio must be in (0, 1), got {ratio}")
    rng = Rng(seed)
    train_idx, test_idx = [], []
    for k in range(ds.num_classes):
        idx = np.flatnonzero(ds.labels == k)
        idx = idx[rng.permutation(len(idx))]
        cut = int(round(ratio * len(idx)))
        train_idx.append(idx[:cut])
        test_idx.append(idx[cut:])
    train_idx = np.sort(np.concatenate(train_idx))
    test_idx = np.sort(np.concatenate(test_idx))

    def subset(idx):
        return Dataset(ds.images[idx], ds.labels[idx], ds.num_classes, dict(ds.meta))

    return subset(train_idx), subset(test_idx)


# IDX type byte -> (numpy big-endian dtype)
IDX_TYPES = {
    0x08: np.dtype(">u1"),
    0x09: np.dtype(">i1"),
    0x0B: np.dtype(">i2"),
    0x0C: np.dtype(">i4"),
    0x0D: np.dtype(">f4"),
    0x0E: np.dtype(">f8"),
}
IDX_CODES = {v: k for k, v in IDX_TYPES.items()}


def read_idx_array(path):
    """Parse an IDX file into a numpy array of its declared type and shape."""
    with open(path, "rb") as fh:
        raw = fh.read()
    if len(raw) < 4:
        raise IDXFormatError("file too short for IDX magic", len(raw))
    if raw[0] != 0 or raw[1] != 0:
        raise IDXFormatError("bad IDX magic: first two bytes must be zero", 0 if raw[0] else 1)
    if raw[2] not in IDX_TYPES:
        raise IDXFormatError(f"unknown IDX data type 0x{raw[2]:02x}", 2)
    ndim = raw[3]
    if ndim == 0:
        raise IDXFormatError("IDX file declares zero dimensions", 3)
    header = 4 + 4 * ndim
    if len(raw) < header:
        raise IDXFormatError("truncated IDX dimension header", len(raw))
    dims = struct.unpack(f">{ndim}I", raw[4:header])
    dtype = IDX_TYPES[raw[2]]
    need = header + int(np.prod(dims)) * dtype.itemsize
    if len(raw) < need:
        raise IDXFormatError(f"truncated IDX payload: need {need} bytes, have {len(raw)}", len(raw))
    if len(raw) > need:
        raise IDXFormatError(f"{len(raw) - need} trailing bytes after IDX payload", need)
    return np.frombuffer(raw, dtype=dtype, count=int(np.prod(dims)), offset=header).reshape(dims)


def write_idx_array(path, array, dtype=">u1"):
    array = np.asarray(array)
    dtype = np.dtype(dtype)
    if dtype not in IDX_CODES:
        raise ValueError(f"dtype {dtype} has no IDX code")
    with open(path, "wb") as fh:
        fh.write(bytes([0, 0, IDX_CODES[dtype], array.ndim]))
        fh.write(struct.pack(f">{array.ndim}I", *array.shape))
        fh.write(array.astype(dtype).tobytes())


def read_idx(images_path, labels_path=None, num_classes=None):
    """Load an image IDX file (N x H x W or N x C x H x W) and optional labels.

    Unsigned-byte pixels are scaled to [0, 1]; float payloads are kept as-is.
    """
    raw = read_idx_array(images_path)
    if raw.ndim == 3:
        raw = raw[:, None]
    elif raw.ndim != 4:
        raise IDXFormatError(f"image IDX must have 3 or 4 dimensions, got {raw.ndim}", 3)
    images = raw.astype(np.float64)
    if raw.dtype == np.dtype(">u1"):
        images /= 255.0
    if labels_path is None:
        labels = np.zeros(len(images), dtype=np.int64)
    else:
        labels = read_idx_array(labels_path).astype(np.int64)
        if labels.ndim != 1 or len(labels) != len(images):
            raise ValueError(f"label file has shape {labels.shape}, expected ({len(images)},)")
    if num_classes is None:
        num_classes = int(labels.max()) + 1 if len(labels) else 1
    return Dataset(images, labels, num_classes, {"source": str(images_path)})


def write_idx(ds, images_path, labels_path=None, dtype=">u1"):
    """Write a dataset as IDX. ``>u1`` quantizes [0, 1] pixels to bytes; ``>f8`` is exact."""
    dtype = np.dtype(dtype)
    if dtype == np.dtype(">u1"):
        data = np.clip(np.rint(ds.images * 255.0), 0, 255)
    else:
        data = ds.images
    if data.shape[1] == 1:
        data = data[:, 0]
    write_idx_array(images_path, data, dtype)
    if labels_path is not None:
        write_idx_array(labels_path, ds.labels, ">u1")
