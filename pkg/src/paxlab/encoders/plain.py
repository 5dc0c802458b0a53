"""Plain (unencoded) value layouts.

Int64/Float64 are 8-byte little-endian, Bool one byte per value, strings a
block of ``u32`` LE byte lengths followed by the concatenated UTF-8 bytes.
"""

from __future__ import annotations

import numpy as np

from ..column import LogicalType
from ..errors import DecodeError


def encode_strings(values) -> tuple:
    """UTF-8 encode; returns (lengths array, concatenated bytes)."""
    raw = [s.encode("utf-8") for s in values]
    lengths = np.fromiter(map(len, raw), dtype=np.int64, count=len(raw))
    return lengths, b"".join(raw)


def decode_strings(blob: bytes, lengths: np.ndarray) -> np.ndarray:
    out = np.empty(len(lengths), dtype=object)
    if len(lengths) == 0:
        return out
    ends = np.cumsum(lengths)
    starts = ends - lengths
    text = blob.decode("utf-8")
    if len(text) == len(blob):
        # pure ASCII: byte offsets are character offsets
        out[:] = [text[a:b] for a, b in zip(starts.tolist(), ends.tolist())]
    else:
        out[:] = [blob[a:b].decode("utf-8") for a, b in zip(starts.tolist(), ends.tolist())]
    return out


def plain_encode(values: np.ndarray, logical_type: LogicalType) -> bytes:
    if logical_type is LogicalType.Int64:
        return np.asarray(values, dtype="<i8").tobytes()
    if logical_type is LogicalType.Float64:
        return np.asarray(values, dtype="<f8").tobytes()
    if logical_type is LogicalType.Bool:
        return np.asarray(values, dtype=np.uint8).tobytes()
    lengths, blob = encode_strings(values)
    return lengths.astype("<u4").tobytes() + blob


def plain_decode(buf, count: int, logical_type: LogicalType, pos: int = 0) -> tuple:
    """Decode ``count`` values at ``buf[pos:]``; returns (array, next pos)."""
    if logical_type in (LogicalType.Int64, LogicalType.Float64):
        size = 8 * count
        if pos + size > len(buf):
            raise DecodeError("plain values truncated")
        dtype = "<i8" if logical_type is LogicalType.Int64 else "<f8"
        arr = np.frombuffer(buf, dtype=dtype, count=count, offset=pos)
        return arr.astype(arr.dtype.newbyteorder("="), copy=True), pos + size
    if logical_type is LogicalType.Bool:
        if pos + count > len(buf):
            raise DecodeError("plain booleans truncated")
        return np.frombuffer(buf, dtype=np.uint8, count=count, offset=pos).astype(np.bool_), pos + count
    if pos + 4 * count > len(buf):
        raise DecodeError("string lengths truncated")
    lengths = np.frombuffer(buf, dtype="<u4", count=count, offset=pos).astype(np.int64)
    pos += 4 * count
    total = int(lengths.sum())
    if pos + total > len(buf):
        raise DecodeError("string bytes truncated")
    return decode_strings(bytes(buf[pos:pos + total]), lengths), pos + total


def plain_entry_sizes(values: np.ndarray, logical_type: LogicalType) -> np.ndarray:
    """Bytes each value occupies in a plain dictionary."""
    if logical_type is LogicalType.Bool:
        return np.ones(len(values), dtype=np.int64)
    if logical_type is LogicalType.Utf8String:
        return 4 + np.fromiter((len(s.encode("utf-8")) for s in values), dtype=np.int64, count=len(values))
    return np.full(len(values), 8, dtype=np.int64)
