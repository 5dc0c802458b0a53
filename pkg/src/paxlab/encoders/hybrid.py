"""RLE / bitpacking hybrid for small unsigned integers (dictionary codes, levels).

Payload: ``u8 bit_width`` followed by runs.  Each run starts with a varint
header whose low bit picks the kind:

* ``(length << 1) | 0`` -- RLE run, then the value in ``ceil(width / 8)``
  little-endian bytes;
* ``(groups << 1) | 1`` -- bitpacked run of ``groups * 8`` values.

The value count lives in the enclosing :class:`EncodedBlock`; a trailing
partial group is zero-padded and truncated on decode.
"""

from __future__ import annotations

import numpy as np

from ..errors import DecodeError, EncodingOverflow
from .bitpack import bitpack, bitunpack, max_bit_width, packed_size, read_varint, write_varint
from .block import EncodedBlock, Scheme

DEFAULT_MIN_RUN = 8


def _runs(values: np.ndarray):
    n = len(values)
    change = np.flatnonzero(values[1:] != values[:-1]) + 1
    starts = np.concatenate(([0], change))
    lengths = np.diff(np.concatenate((starts, [n])))
    return starts, lengths


def rle_bp_hybrid_encode(values, rle_min_run: int = DEFAULT_MIN_RUN) -> EncodedBlock:
    values = np.asarray(values)
    if len(values) and values.dtype.kind == "i" and values.min() < 0:
        raise EncodingOverflow("hybrid encoder takes non-negative integers")
    values = values.astype(np.uint64, copy=False)
    n = len(values)
    if n == 0:
        return EncodedBlock(Scheme.RleBitpackHybrid, 0, b"")
    if rle_min_run < 1:
        raise EncodingOverflow("rle_min_run must be positive")
    width = max_bit_width(values)
    value_bytes = (width + 7) // 8
    out = bytearray([width])

    def emit_literals(start, stop):
        if stop <= start:
            return
        groups = -(-(stop - start) // 8)
        write_varint(out, (groups << 1) | 1)
        out.extend(bitpack(values[start:stop], width))

    starts, lengths = _runs(values)
    long_runs = np.flatnonzero(lengths >= rle_min_run)
    lit_start = 0
    for idx in long_runs.tolist():
        s = int(starts[idx])
        length = int(lengths[idx])
        pad = (-(s - lit_start)) % 8
        # literal runs hold whole groups, so a pending partial group borrows
        # from the head of the run
        if length - pad < rle_min_run:
            continue
        emit_literals(lit_start, s + pad)
        write_varint(out, (length - pad) << 1)
        out.extend(int(values[s]).to_bytes(value_bytes, "little"))
        lit_start = s + length
    emit_literals(lit_start, n)
    return EncodedBlock(Scheme.RleBitpackHybrid, n, bytes(out))


def rle_bp_hybrid_decode(block: EncodedBlock) -> np.ndarray:
    n = block.value_count
    out = np.empty(n, dtype=np.uint64)
    if n == 0:
        return out
    buf = block.payload
    if not buf:
        raise DecodeError("hybrid payload empty")
    width = buf[0]
    value_bytes = (width + 7) // 8
    pos, filled = 1, 0
    while filled < n:
        header, pos = read_varint(buf, pos)
        if header & 1:
            count = (header >> 1) * 8
            take = min(count, n - filled)
            out[filled:filled + take] = bitunpack(buf, count, width, pos)[:take]
            pos += packed_size(count, width)
        else:
            count = header >> 1
            if pos + value_bytes > len(buf) or filled + count > n:
                raise DecodeError("RLE run overflows block")
            out[filled:filled + count] = int.from_bytes(buf[pos:pos + value_bytes], "little")
            pos += value_bytes
            take = count
        filled += take
    return out


def describe_runs(block: EncodedBlock) -> list:
    """List of ``("rle" | "bitpacked", value count)`` per run, for inspection."""
    runs = []
    buf = block.payload
    if block.value_count == 0:
        return runs
    width = buf[0]
    value_bytes = (width + 7) // 8
    pos, seen = 1, 0
    while seen < block.value_count:
        header, pos = read_varint(buf, pos)
        if header & 1:
            count = (header >> 1) * 8
            pos += packed_size(count, width)
            runs.append(("bitpacked", count))
        else:
            count = header >> 1
            pos += value_bytes
            runs.append(("rle", count))
        seen += count
    return runs
