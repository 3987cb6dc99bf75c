"""Portable graymap (PGM, P2/P5) reading and writing."""
import numpy as np


class RasterError(ValueError):
    pass


def _tokens(raw):
    out, i = [], 0
    while i < len(raw) and len(out) < 4:
        c = raw[i:i + 1]
        if c == b"#":
            while i < len(raw) and raw[i:i + 1] not in (b"\n", b"\r"):
                i += 1
        elif c.isspace():
            i += 1
        else:
            j = i
            while j < len(raw) and not raw[j:j + 1].isspace():
                j += 1
            out.append(raw[i:j])
            i = j
    return out, i + 1


def read_pgm(path):
    """Read a PGM file into a float64 array scaled to [0, 1]."""
    with open(path, "rb") as fh:
        raw = fh.read()
    head, pos = _tokens(raw)
    if len(head) < 4 or head[0] not in (b"P2", b"P5"):
        raise RasterError(f"{path}: not a P2/P5 graymap")
    w, h, maxval = (int(t) for t in head[1:])
    if head[0] == b"P5":
        dtype = ">u1" if maxval < 256 else ">u2"
        data = np.frombuffer(raw, dtype=dtype, count=w * h, offset=pos)
    else:
        data = np.array(raw[pos - 1:].split(), dtype=np.int64)
        if data.size != w * h:
            raise RasterError(f"{path}: expected {w * h} samples, found {data.size}")
    return data.reshape(h, w).astype(np.float64) / maxval


def write_pgm(path, image, plain=False):
    """Write an image linearly rescaled from its [min, max] to 0..255."""
    image = np.asarray(image, dtype=np.float64)
    lo, hi = image.min(), image.max()
    scaled = np.zeros(image.shape) if hi == lo else (image - lo) / (hi - lo)
    # round away float noise first so ties at .5 quantize the same for equivalent inputs
    pix = np.rint(np.round(scaled * 255, 6)).astype(np.uint8)
    h, w = pix.shape
    with open(path, "wb") as fh:
        if plain:
            fh.write(f"P2\n{w} {h}\n255\n".encode())
            for row in pix:
                fh.write((" ".join(str(v) for v in row) + "\n").encode())
        else:
            fh.write(f"P5\n{w} {h}\n255\n".encode())
            fh.write(pix.tobytes())
