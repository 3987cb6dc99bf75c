"""Named-tensor checkpoint files.

Layout (all little-endian)::

    b"WVNC"  u32 version  u32 entry_count
    per entry: u32 name_len, name (UTF-8), u32 ndim, u64 dims[ndim], f64 values
    u32 CRC32 of every preceding byte
"""
import struct
import zlib

import numpy as np

MAGIC = b"WVNC"
VERSION = 1


class CheckpointError(ValueError):
    pass


def encode(entries):
    parts = [MAGIC, struct.pack("<II", VERSION, len(entries))]
    for name, value in entries.items():
        arr = np.asarray(value, dtype="<f8")
        if arr.ndim == 0:
            arr = arr.reshape(1)
        raw_name = name.encode("utf-8")
        parts.append(struct.pack("<I", len(raw_name)))
        parts.append(raw_name)
        parts.append(struct.pack(f"<I{arr.ndim}Q", arr.ndim, *arr.shape))
        parts.append(np.ascontiguousarray(arr).tobytes())
    body = b"".join(parts)
    return body + struct.pack("<I", zlib.crc32(body))


def decode(raw):
    if len(raw) < 16 or raw[:4] != MAGIC:
        raise CheckpointError("not a WVNC checkpoint (bad magic)")
    body, (crc,) = raw[:-4], struct.unpack("<I", raw[-4:])
    if zlib.crc32(body) != crc:
        raise CheckpointError("checkpoint CRC mismatch; file is corrupted")
    version, count = struct.unpack_from("<II", body, 4)
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version}")
    pos = 12
    entries = {}
    try:
        for _ in range(count):
            (nlen,) = struct.unpack_from("<I", body, pos)
            pos += 4
            name = body[pos:pos + nlen].decode("utf-8")
            pos += nlen
            (ndim,) = struct.unpack_from("<I", body, pos)
            pos += 4
            dims = struct.unpack_from(f"<{ndim}Q", body, pos)
            pos += 8 * ndim
            size = int(np.prod(dims))
            if pos + 8 * size > len(body):
                raise CheckpointError(f"entry {name!r} runs past end of file")
            values = np.frombuffer(body, dtype="<f8", count=size, offset=pos).astype(np.float64).reshape(dims)
            pos += 8 * size
            if name in entries:
                raise CheckpointError(f"duplicate entry name {name!r}")
            entries[name] = values
    except struct.error as exc:
        raise CheckpointError(f"truncated checkpoint at byte {pos}") from exc
    if pos != len(body):
        raise CheckpointError(f"{len(body) - pos} unexpected bytes after last entry")
    return entries


def save(path, entries):
    with open(path, "wb") as fh:
        fh.write(encode(entries))


def load(path):
    with open(path, "rb") as fh:
        return decode(fh.read())
