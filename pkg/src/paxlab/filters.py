"""Zone maps, zone pruning and the split-block Bloom filter (SBBF).

Keys are hashed to 64 bits with the splitmix64 finalizer applied to the
value's canonical little-endian bits: integers as-is, floats by bit pattern
(``-0.0`` folded into ``+0.0``), booleans as 0/1.  Strings are first folded
to 64 bits with pandas' keyed SipHash over their UTF-8 bytes.
"""

from __future__ import annotations

import enum
import math
import struct
from dataclasses import dataclass
from typing import Any

import numpy as np
import pandas as pd

from .column import ColumnVector, LogicalType
from .errors import DecodeError, InvalidConfig
from .predicates import PredicateSpec, check_predicate_type

_U64 = np.uint64
_M32 = _U64(0xFFFFFFFF)

# the eight odd multipliers of the published SBBF design
SALT = np.array(
    [0x47B6137B, 0x44974D91, 0x8824AD5B, 0xA2B7289D, 0x705495C7, 0x2DF1424B, 0x9EFC4947, 0x5C6BFB31],
    dtype=_U64,
)
BLOCK_BITS = 256
WORDS_PER_BLOCK = 8


def splitmix64(x) -> np.ndarray:
    x = np.asarray(x, dtype=_U64) + _U64(0x9E3779B97F4A7C15)
    x = (x ^ (x >> _U64(30))) * _U64(0xBF58476D1CE4E5B9)
    x = (x ^ (x >> _U64(27))) * _U64(0x94D049BB133111EB)
    return x ^ (x >> _U64(31))


def hash_values(values, logical_type: LogicalType) -> np.ndarray:
    """64-bit key digests for an array of values of one logical type."""
    if logical_type is LogicalType.Utf8String:
        arr = np.asarray(values, dtype=object)
        if len(arr) == 0:
            return np.empty(0, dtype=_U64)
        return splitmix64(pd.util.hash_array(arr, categorize=False))
    if logical_type is LogicalType.Float64:
        arr = np.array(values, dtype=np.float64)
        arr[arr == 0.0] = 0.0
        return splitmix64(arr.view(_U64))
    if logical_type is LogicalType.Bool:
        return splitmix64(np.asarray(values, dtype=np.bool_).astype(_U64))
    return splitmix64(np.asarray(values, dtype=np.int64).view(_U64))


def hash_value(value: Any, logical_type: LogicalType) -> int:
    return int(hash_values(np.array([value], dtype=object if logical_type is LogicalType.Utf8String
                                    else None), logical_type)[0])


def sbbf_size_for(n: int, fpp: float) -> int:
    """Number of 256-bit blocks for ``n`` distinct keys at target ``fpp``.

    Uses the exact inversion of the 8-bits-per-key false-positive rate,
    ``bits = -8 n / ln(1 - fpp ** (1/8))``, rounded up to whole blocks.
    """
    if n < 1 or not 0 < fpp <= 0.5:
        raise InvalidConfig(f"bad Bloom sizing n={n} fpp={fpp}")
    bits = -8.0 * n / math.log1p(-(fpp ** 0.125))
    return max(1, math.ceil(bits / BLOCK_BITS))


class SplitBlockBloomFilter:
    def __init__(self, num_blocks: int, words: np.ndarray | None = None):
        if num_blocks < 1:
            raise InvalidConfig("a Bloom filter needs at least one block")
        self.num_blocks = int(num_blocks)
        if words is None:
            words = np.zeros(self.num_blocks * WORDS_PER_BLOCK, dtype=np.uint32)
        self.words = words

    @classmethod
    def for_keys(cls, n: int, fpp: float) -> "SplitBlockBloomFilter":
        return cls(sbbf_size_for(max(n, 1), fpp))

    def _positions(self, hashes: np.ndarray):
        h = np.atleast_1d(np.asarray(hashes, dtype=_U64))
        block = ((h >> _U64(32)) * _U64(self.num_blocks)) >> _U64(32)
        low = h & _M32
        bit = ((low[:, None] * SALT[None, :]) & _M32) >> _U64(27)
        word = block[:, None] * _U64(WORDS_PER_BLOCK) + np.arange(WORDS_PER_BLOCK, dtype=_U64)[None, :]
        return word.astype(np.int64), bit.astype(np.uint32)

    def insert_many(self, hashes) -> None:
        word, bit = self._positions(hashes)
        np.bitwise_or.at(self.words, word.ravel(), (np.uint32(1) << bit).ravel())

    def query_many(self, hashes) -> np.ndarray:
        word, bit = self._positions(hashes)
        return ((self.words[word] >> bit) & 1).all(axis=1)

    def insert(self, hash64: int) -> None:
        self.insert_many(np.array([hash64], dtype=_U64))

    def query(self, hash64: int) -> bool:
        return bool(self.query_many(np.array([hash64], dtype=_U64))[0])

    def to_bytes(self) -> bytes:
        return struct.pack("<I", self.num_blocks) + self.words.astype("<u4").tobytes()

    @classmethod
    def from_bytes(cls, buf) -> "SplitBlockBloomFilter":
        if len(buf) < 4:
            raise DecodeError("Bloom filter header truncated")
        (num_blocks,) = struct.unpack_from("<I", buf, 0)
        size = num_blocks * BLOCK_BITS // 8
        if len(buf) < 4 + size:
            raise DecodeError("Bloom filter truncated")
        words = np.frombuffer(buf, dtype="<u4", count=num_blocks * WORDS_PER_BLOCK, offset=4).astype(np.uint32)
        return cls(num_blocks, words)

    @property
    def nbytes(self) -> int:
        return 4 + self.num_blocks * BLOCK_BITS // 8

    def __eq__(self, other):
        return (isinstance(other, SplitBlockBloomFilter) and self.num_blocks == other.num_blocks
                and np.array_equal(self.words, other.words))


def sbbf_insert(bloom: SplitBlockBloomFilter, hash64: int) -> None:
    bloom.insert(hash64)


def sbbf_query(bloom: SplitBlockBloomFilter, hash64: int) -> bool:
    return bloom.query(hash64)


def build_bloom(col: ColumnVector, fpp: float) -> SplitBlockBloomFilter:
    """Filter holding every distinct present value of ``col``."""
    hashes = np.unique(hash_values(col.present(), col.logical_type))
    bloom = SplitBlockBloomFilter.for_keys(len(hashes), fpp)
    if len(hashes):
        bloom.insert_many(hashes)
    return bloom


# ---------------------------------------------------------------------------
# zone maps


@dataclass(frozen=True)
class ZoneMap:
    logical_type: LogicalType
    row_count: int
    null_count: int
    min: Any = None
    max: Any = None

    def __post_init__(self):
        if self.null_count > self.row_count:
            raise InvalidConfig("zone null_count exceeds row_count")
        if self.min is not None and self.max is not None and self.min > self.max:
            raise InvalidConfig("zone min exceeds max")

    @property
    def has_values(self) -> bool:
        return self.min is not None

    @classmethod
    def of(cls, col: ColumnVector) -> "ZoneMap":
        present = col.present()
        lo = hi = None
        if len(present):
            lt = col.logical_type
            if lt is LogicalType.Float64:
                finite = present[~np.isnan(present)]
                if len(finite):
                    lo, hi = float(finite.min()), float(finite.max())
            elif lt is LogicalType.Utf8String:
                lo, hi = min(present), max(present)
            elif lt is LogicalType.Bool:
                lo, hi = bool(present.min()), bool(present.max())
            else:
                lo, hi = int(present.min()), int(present.max())
        return cls(col.logical_type, len(col), col.null_count, lo, hi)

    @classmethod
    def merge(cls, zones) -> "ZoneMap":
        zones = list(zones)
        lt = zones[0].logical_type
        with_values = [z for z in zones if z.has_values]
        lo = min(z.min for z in with_values) if with_values else None
        hi = max(z.max for z in with_values) if with_values else None
        return cls(lt, sum(z.row_count for z in zones), sum(z.null_count for z in zones), lo, hi)


class PruneDecision(enum.Enum):
    Skip = "skip"
    Inspect = "inspect"


def zone_prune(zone: ZoneMap, pred: PredicateSpec) -> PruneDecision:
    """Skip only when no row of the zone can satisfy ``pred``."""
    check_predicate_type(pred, zone.logical_type)
    if zone.row_count == 0 or not zone.has_values:
        return PruneDecision.Skip
    lo, hi = pred.bounds
    if hi < zone.min or lo > zone.max:
        return PruneDecision.Skip
    return PruneDecision.Inspect
