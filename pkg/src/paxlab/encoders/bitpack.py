"""Bitpacking, zigzag mapping and varints.

Layout: values are packed LSB-first into little-endian bytes, in groups of
eight (the last group zero-padded), so the payload of ``count`` values at
``width`` bits is ``ceil(count / 8) * width`` bytes.
"""

from __future__ import annotations

import numpy as np

from ..errors import DecodeError, EncodingOverflow

_U64 = np.uint64


def bit_width(max_value: int) -> int:
    return int(max_value).bit_length()


def max_bit_width(values: np.ndarray) -> int:
    if len(values) == 0:
        return 0
    return bit_width(int(np.asarray(values, dtype=_U64).max()))


def bit_lengths(values: np.ndarray) -> np.ndarray:
    """Per-element bit length of unsigned 64-bit values."""
    v = np.asarray(values, dtype=_U64)
    out = np.zeros(v.shape, dtype=np.int64)
    nz = v != 0
    if nz.any():
        # frexp on float64 is exact below 2**53; fix up the top range separately
        x = v[nz]
        exp = np.frexp(x.astype(np.float64))[1].astype(np.int64)
        big = x >= _U64(1 << 53)
        if big.any():
            exp[big] = [int(b).bit_length() for b in x[big].tolist()]
        out[nz] = exp
    return out


def zigzag_encode(values: np.ndarray) -> np.ndarray:
    v = np.asarray(values, dtype=np.int64)
    return ((v << 1) ^ (v >> 63)).view(_U64)


def zigzag_decode(values: np.ndarray) -> np.ndarray:
    u = np.asarray(values, dtype=_U64)
    return ((u >> _U64(1)) ^ (_U64(0) - (u & _U64(1)))).view(np.int64)


def zigzag_int(value: int) -> int:
    return ((value << 1) ^ (value >> 63)) & 0xFFFFFFFFFFFFFFFF


def unzigzag_int(value: int) -> int:
    return (value >> 1) ^ -(value & 1)


def packed_size(count: int, width: int) -> int:
    return -(-count // 8) * width


def bitpack(values, bit_width: int) -> bytes:
    values = np.asarray(values, dtype=_U64)
    if not 0 <= bit_width <= 64:
        raise EncodingOverflow(f"bit width {bit_width} outside 0..64")
    n = len(values)
    if n == 0 or bit_width == 0:
        if n and values.max() != 0:
            raise EncodingOverflow("non-zero value at bit width 0")
        return b""
    if bit_width < 64 and values.max() >> _U64(bit_width):
        raise EncodingOverflow(f"value exceeds {bit_width} bits")
    padded = -(-n // 8) * 8
    if padded != n:
        values = np.concatenate([values, np.zeros(padded - n, dtype=_U64)])
    if bit_width % 8 == 0:
        nbytes = bit_width // 8
        return values.astype("<u8").view(np.uint8).reshape(padded, 8)[:, :nbytes].tobytes()
    shifts = np.arange(bit_width, dtype=_U64)
    bits = ((values[:, None] >> shifts[None, :]) & _U64(1)).astype(np.uint8)
    return np.packbits(bits.reshape(-1), bitorder="little").tobytes()


def bitunpack(payload, count: int, bit_width: int, offset: int = 0) -> np.ndarray:
    """Inverse of :func:`bitpack`; reads from ``payload[offset:]``."""
    if count == 0 or bit_width == 0:
        return np.zeros(count, dtype=_U64)
    padded = -(-count // 8) * 8
    nbytes = padded * bit_width // 8
    raw = np.frombuffer(payload, dtype=np.uint8, count=nbytes, offset=offset) \
        if len(payload) - offset >= nbytes else None
    if raw is None:
        raise DecodeError("bitpacked payload truncated")
    if bit_width % 8 == 0:
        width_bytes = bit_width // 8
        full = np.zeros((padded, 8), dtype=np.uint8)
        full[:, :width_bytes] = raw.reshape(padded, width_bytes)
        return full.view("<u8").reshape(-1)[:count].astype(_U64)
    bits = np.unpackbits(raw, bitorder="little").reshape(padded, bit_width)
    weights = _U64(1) << np.arange(bit_width, dtype=_U64)
    out = (bits.astype(_U64) * weights[None, :]).sum(axis=1, dtype=_U64)
    return out[:count]


def exact_packed_size(count: int, width: int) -> int:
    return -(-count * width // 8)


def bitpack_exact(values, bit_width: int) -> bytes:
    """:func:`bitpack` without the zero padding of the last 8-value group."""
    return bitpack(values, bit_width)[:exact_packed_size(len(values), bit_width)]


def bitunpack_exact(payload, count: int, bit_width: int, offset: int = 0) -> np.ndarray:
    """Inverse of :func:`bitpack_exact`."""
    nbytes = exact_packed_size(count, bit_width)
    if len(payload) - offset < nbytes:
        raise DecodeError("bitpacked payload truncated")
    padded = bytes(payload[offset:offset + nbytes]).ljust(packed_size(count, bit_width), b"\0")
    return bitunpack(padded, count, bit_width)


def write_varint(out: bytearray, value: int) -> None:
    if value < 0:
        raise EncodingOverflow("varint of a negative value")
    while value >= 0x80:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    out.append(value)


def read_varint(buf, pos: int) -> tuple:
    result = 0
    shift = 0
    while True:
        if pos >= len(buf):
            raise DecodeError("varint runs past end of buffer")
        b = buf[pos]
        pos += 1
        result |= (b & 0x7F) << shift
        if b < 0x80:
            return result, pos
        shift += 7
        if shift > 70:
            raise DecodeError("varint too long")


def varint_bytes(value: int) -> bytes:
    out = bytearray()
    write_varint(out, value)
    return bytes(out)
