"""Byte-level RLE, used for validity bitmaps and OrcLike boolean columns.

``byte_rle`` payload is a sequence of runs, each a varint header
``(count << 1) | literal`` followed by one repeated byte or ``count``
literal bytes.  Presence payloads prefix the bit count as a varint and pack
the bitmap LSB-first.
"""

from __future__ import annotations

import numpy as np

from ..errors import DecodeError
from .bitpack import read_varint, write_varint

MIN_BYTE_REPEAT = 3


def byte_rle_encode(data) -> bytes:
    data = np.frombuffer(bytes(data), dtype=np.uint8) if not isinstance(data, np.ndarray) else data
    n = len(data)
    out = bytearray()
    if n == 0:
        return bytes(out)
    change = np.flatnonzero(data[1:] != data[:-1]) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [n])))
    lit_start = 0
    raw = data.tobytes()
    for idx in np.flatnonzero(lengths >= MIN_BYTE_REPEAT).tolist():
        s, length = int(starts[idx]), int(lengths[idx])
        if s > lit_start:
            write_varint(out, ((s - lit_start) << 1) | 1)
            out += raw[lit_start:s]
        write_varint(out, length << 1)
        out.append(raw[s])
        lit_start = s + length
    if n > lit_start:
        write_varint(out, ((n - lit_start) << 1) | 1)
        out += raw[lit_start:]
    return bytes(out)


def byte_rle_decode(payload, nbytes: int, pos: int = 0) -> tuple:
    """Decode ``nbytes`` bytes starting at ``payload[pos:]``; returns (array, next pos)."""
    out = np.empty(nbytes, dtype=np.uint8)
    filled = 0
    while filled < nbytes:
        header, pos = read_varint(payload, pos)
        count = header >> 1
        if filled + count > nbytes:
            raise DecodeError("byte RLE run overflows")
        if header & 1:
            if pos + count > len(payload):
                raise DecodeError("byte RLE literal truncated")
            out[filled:filled + count] = np.frombuffer(payload, dtype=np.uint8, count=count, offset=pos)
            pos += count
        else:
            out[filled:filled + count] = payload[pos]
            pos += 1
        filled += count
    return out, pos


def presence_encode(validity) -> bytes:
    bits = np.asarray(validity, dtype=np.bool_)
    if len(bits) == 0:
        return b""
    out = bytearray()
    write_varint(out, len(bits))
    out += byte_rle_encode(np.packbits(bits, bitorder="little"))
    return bytes(out)


def presence_decode(payload, pos: int = 0, end: int | None = None) -> np.ndarray:
    end = len(payload) if end is None else end
    if end <= pos:
        return np.empty(0, dtype=np.bool_)
    nbits, pos = read_varint(payload, pos)
    packed, _ = byte_rle_decode(payload, -(-nbits // 8), pos)
    return np.unpackbits(packed, bitorder="little", count=nbits).astype(np.bool_)
