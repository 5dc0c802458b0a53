"""Rule-based four-scheme signed integer encoder (ORC RLEv2 style).

A greedy left-to-right scan with a 512-value lookahead picks one scheme per
subsequence.  Every subsequence starts with a header whose top two bits are
the tag:

``SHORT_REPEAT`` (00)
    1 byte ``tag | value_bytes - 1 (3 bits) | run - 3 (3 bits)``, then the
    zigzagged value in ``value_bytes`` little-endian bytes.  Runs of 3..10.
``DIRECT`` (01)
    3 bytes ``tag | width code (6 bits)``, ``u16 LE length - 1``; then the
    zigzagged values bitpacked at ``width``.
``PATCHED_BASE`` (10)
    Same 3-byte header carrying the 90th-percentile width.  Payload: zigzag
    varint base (the minimum), ``value - base`` low bits bitpacked, varint
    patch count, ``u8`` patch width, patch positions bitpacked at 9 bits and
    the patch high bits bitpacked at the patch width.
``DELTA`` (11)
    Same 3-byte header carrying the delta width.  Payload: zigzag varint
    base, then ``length - 1`` zigzagged deltas bitpacked.

Width codes 0..62 mean that many bits, code 63 means 64 bits.  Bit-packed
sections take exactly ``ceil(count * width / 8)`` bytes (no group padding).
"""

from __future__ import annotations

import numpy as np

from ..errors import DecodeError
from .bitpack import (
    bit_lengths,
    bitpack_exact,
    bitunpack_exact,
    exact_packed_size,
    read_varint,
    unzigzag_int,
    write_varint,
    zigzag_decode,
    zigzag_encode,
)
from .block import EncodedBlock, Scheme

SHORT_REPEAT, DIRECT, PATCHED_BASE, DELTA = 0, 1, 2, 3
TAG_NAMES = {SHORT_REPEAT: "SHORT_REPEAT", DIRECT: "DIRECT", PATCHED_BASE: "PATCHED_BASE", DELTA: "DELTA"}

MAX_LOOKAHEAD = 512
MIN_REPEAT = 3
MAX_SHORT_REPEAT = 10
MIN_DELTA_RUN = 4
PATCH_POSITION_BITS = 9

_U64 = np.uint64


def width_code(width: int) -> int:
    return width if width <= 62 else 63


def code_width(code: int) -> int:
    return code if code <= 62 else 64


def _storable_width(width: int) -> int:
    return code_width(width_code(width))


def _run_ends(breaks: np.ndarray, n: int) -> np.ndarray:
    """For every j, the end of the maximal run starting at j given break points."""
    idx = np.searchsorted(breaks, np.arange(n), side="right")
    padded = np.concatenate((breaks, [n]))
    return padded[idx]


class _SparseMax:
    """O(1) range-max over a fixed integer array."""

    def __init__(self, arr: np.ndarray):
        self.levels = [np.asarray(arr, dtype=np.int16)]
        k = 1
        while (1 << k) <= len(arr):
            prev = self.levels[-1]
            half = 1 << (k - 1)
            self.levels.append(np.maximum(prev[:-half], prev[half:]))
            k += 1

    def query(self, starts: np.ndarray, lengths: np.ndarray) -> np.ndarray:
        out = np.zeros(len(starts), dtype=np.int64)
        if len(starts) == 0:
            return out
        k = np.floor(np.log2(np.maximum(lengths, 1))).astype(np.int64)
        for level in np.unique(k).tolist():
            sel = k == level
            tab = self.levels[level]
            s = starts[sel]
            e = s + lengths[sel] - (1 << level)
            out[sel] = np.maximum(tab[s], tab[e])
        return out


def _varint_len(values_bits: np.ndarray) -> np.ndarray:
    return np.maximum(1, -(-values_bits // 7))


def _plan(v: np.ndarray):
    """Vectorized run analysis shared by the greedy scan."""
    n = len(v)
    zz = zigzag_encode(v)
    vw = bit_lengths(zz)
    change = np.flatnonzero(v[1:] != v[:-1]) + 1
    rep_len = _run_ends(change, n) - np.arange(n)
    down = np.flatnonzero(v[1:] < v[:-1]) + 1
    up = np.flatnonzero(v[1:] > v[:-1]) + 1
    mono_len = np.maximum(_run_ends(down, n), _run_ends(up, n)) - np.arange(n)
    mono_len = np.minimum(mono_len, MAX_LOOKAHEAD)

    worthwhile = np.zeros(n, dtype=np.bool_)
    cand = np.flatnonzero(mono_len >= MIN_DELTA_RUN)
    if len(cand):
        with np.errstate(over="ignore"):
            deltas = v[1:] - v[:-1]
        dw = bit_lengths(zigzag_encode(deltas))
        lengths = mono_len[cand]
        dmax = _SparseMax(dw).query(cand, lengths - 1)
        vmax = _SparseMax(vw).query(cand, lengths)
        delta_cost = 3 + _varint_len(vw[cand]) + (-(-((lengths - 1) * dmax) // 8))
        direct_cost = -(-(lengths * vmax) // 8)
        # a DELTA run also splits the surrounding literal group (one more header)
        worthwhile[cand] = delta_cost + 3 < direct_cost
    trigger = np.flatnonzero((rep_len >= MIN_REPEAT) | worthwhile)
    return zz, rep_len, mono_len, worthwhile, trigger


def _header3(out: bytearray, tag: int, width: int, length: int) -> None:
    out.append((tag << 6) | width_code(width))
    out += (length - 1).to_bytes(2, "little")


def _emit_delta(out, v, start, length):
    seg = v[start:start + length]
    with np.errstate(over="ignore"):
        deltas = seg[1:] - seg[:-1]
    dz = zigzag_encode(deltas)
    width = _storable_width(int(dz.max()).bit_length()) if len(dz) else 0
    _header3(out, DELTA, width, length)
    write_varint(out, int(zigzag_encode(seg[:1])[0]))
    out += bitpack_exact(dz, width)


def _emit_literals(out, v, zz, start, stop):
    seg = v[start:stop]
    length = stop - start
    u = seg.view(_U64) - _U64(int(seg.min()) & 0xFFFFFFFFFFFFFFFF)
    su = np.sort(u)
    p100 = int(su[-1]).bit_length()
    p90 = int(su[max(0, -(-9 * length // 10) - 1)]).bit_length()
    if p100 - p90 >= 2:
        base = int(seg.min())
        low_width = _storable_width(p90)
        patch_width = p100 - low_width
        mask = _U64((1 << low_width) - 1) if low_width < 64 else _U64(0xFFFFFFFFFFFFFFFF)
        positions = np.flatnonzero(u >> _U64(low_width)) if low_width < 64 else np.empty(0, np.int64)
        _header3(out, PATCHED_BASE, low_width, length)
        write_varint(out, ((base << 1) ^ (base >> 63)) & 0xFFFFFFFFFFFFFFFF)
        out += bitpack_exact(u & mask, low_width)
        write_varint(out, len(positions))
        out.append(patch_width)
        out += bitpack_exact(positions.astype(_U64), PATCH_POSITION_BITS)
        out += bitpack_exact(u[positions] >> _U64(low_width), patch_width)
        return PATCHED_BASE
    seg_zz = zz[start:stop]
    width = _storable_width(int(seg_zz.max()).bit_length())
    _header3(out, DIRECT, width, length)
    out += bitpack_exact(seg_zz, width)
    return DIRECT


def orc_hybrid_encode(values) -> EncodedBlock:
    v = np.ascontiguousarray(values, dtype=np.int64)
    n = len(v)
    if n == 0:
        return EncodedBlock(Scheme.OrcHybrid, 0, b"")
    zz, rep_len, mono_len, worthwhile, trigger = _plan(v)
    out = bytearray()
    i = 0
    while i < n:
        r = int(rep_len[i])
        if MIN_REPEAT <= r <= MAX_SHORT_REPEAT:
            value = int(zz[i])
            nbytes = max(1, (value.bit_length() + 7) // 8)
            out.append((SHORT_REPEAT << 6) | ((nbytes - 1) << 3) | (r - MIN_REPEAT))
            out += value.to_bytes(nbytes, "little")
            i += r
            continue
        if r > MAX_SHORT_REPEAT:
            # identical run: zero-slope DELTA over the run itself
            run = min(r, MAX_LOOKAHEAD)
            _emit_delta(out, v, i, run)
            i += run
            continue
        m = int(mono_len[i])
        if m >= MIN_DELTA_RUN and worthwhile[i]:
            _emit_delta(out, v, i, m)
            i += m
            continue
        k = int(np.searchsorted(trigger, i, side="right"))
        stop = int(trigger[k]) if k < len(trigger) else n
        stop = min(stop, i + MAX_LOOKAHEAD, n)
        _emit_literals(out, v, zz, i, stop)
        i = stop
    return EncodedBlock(Scheme.OrcHybrid, n, bytes(out))


def _walk(block: EncodedBlock, out: np.ndarray | None):
    """Iterate subsequences; decodes into ``out`` when given."""
    buf = block.payload
    n = block.value_count
    pos = filled = 0
    parts = []
    while filled < n:
        if pos >= len(buf):
            raise DecodeError("ORC hybrid payload truncated")
        head = buf[pos]
        tag = head >> 6
        if tag == SHORT_REPEAT:
            nbytes = ((head >> 3) & 7) + 1
            run = (head & 7) + MIN_REPEAT
            value = unzigzag_int(int.from_bytes(buf[pos + 1:pos + 1 + nbytes], "little"))
            pos += 1 + nbytes
            if out is not None:
                out[filled:filled + run] = value
            parts.append((TAG_NAMES[tag], run, nbytes * 8))
            filled += run
            continue
        width = code_width(head & 0x3F)
        length = int.from_bytes(buf[pos + 1:pos + 3], "little") + 1
        pos += 3
        if filled + length > n:
            raise DecodeError("ORC hybrid subsequence overruns value count")
        if tag == DIRECT:
            if out is not None:
                out[filled:filled + length] = zigzag_decode(bitunpack_exact(buf, length, width, pos))
            pos += exact_packed_size(length, width)
        elif tag == DELTA:
            base, pos = read_varint(buf, pos)
            if out is not None:
                deltas = zigzag_decode(bitunpack_exact(buf, length - 1, width, pos))
                seg = np.empty(length, dtype=np.int64)
                seg[0] = unzigzag_int(base)
                seg[1:] = deltas
                with np.errstate(over="ignore"):
                    out[filled:filled + length] = np.cumsum(seg, dtype=np.int64)
            pos += exact_packed_size(length - 1, width)
        else:
            base, pos = read_varint(buf, pos)
            low_pos = pos
            pos += exact_packed_size(length, width)
            npatch, pos = read_varint(buf, pos)
            patch_width = buf[pos]
            pos += 1
            pos_off = pos
            pos += exact_packed_size(npatch, PATCH_POSITION_BITS)
            high_off = pos
            pos += exact_packed_size(npatch, patch_width)
            if out is not None:
                u = bitunpack_exact(buf, length, width, low_pos)
                if npatch:
                    where = bitunpack_exact(buf, npatch, PATCH_POSITION_BITS, pos_off).astype(np.int64)
                    highs = bitunpack_exact(buf, npatch, patch_width, high_off)
                    u[where] |= highs << _U64(width)
                out[filled:filled + length] = (u + _U64(unzigzag_int(base) & 0xFFFFFFFFFFFFFFFF)).view(np.int64)
        parts.append((TAG_NAMES[tag], length, width))
        filled += length
    return parts


def orc_hybrid_decode(block: EncodedBlock) -> np.ndarray:
    out = np.empty(block.value_count, dtype=np.int64)
    with np.errstate(over="ignore"):
        _walk(block, out)
    return out


def describe_subsequences(block: EncodedBlock) -> list:
    """``(tag name, length, width)`` per subsequence, in order."""
    return _walk(block, None)
