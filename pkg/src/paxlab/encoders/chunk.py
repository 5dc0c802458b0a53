"""Encoding policies, dictionaries and column-chunk (page) encoding.

A column chunk is an optional dictionary page followed by data pages.  Each
data page is self-describing::

    u8 page kind | varint rows | varint presence length | presence | values

A presence length of zero means every row is present.  The value section
holds only present values, in the layout named by the page kind.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np
import pandas as pd

from ..column import PLACEHOLDERS, ColumnVector, LogicalType, concat_columns, dtype_for
from ..errors import DecodeError, InvalidConfig
from .bitpack import read_varint, write_varint
from .block import EncodedBlock, Scheme
from .hybrid import DEFAULT_MIN_RUN, rle_bp_hybrid_decode, rle_bp_hybrid_encode
from .orc import orc_hybrid_decode, orc_hybrid_encode
from .plain import decode_strings, encode_strings, plain_decode, plain_encode, plain_entry_sizes
from .presence import byte_rle_decode, byte_rle_encode, presence_decode, presence_encode


class EncodingStyle(enum.Enum):
    ParquetLike = "parquet"
    OrcLike = "orc"
    PlainOnly = "plain"


@dataclass(frozen=True)
class EncodingPolicy:
    style: EncodingStyle = EncodingStyle.ParquetLike
    dict_size_limit_bytes: int = 1 << 20
    ndv_ratio_threshold: float = 0.8
    rle_min_run: int = DEFAULT_MIN_RUN

    def __post_init__(self):
        if self.dict_size_limit_bytes <= 0 or self.ndv_ratio_threshold <= 0 or self.rle_min_run <= 0:
            raise InvalidConfig("encoding policy thresholds must be positive")

    @classmethod
    def parquet_like(cls, **kw) -> "EncodingPolicy":
        return cls(EncodingStyle.ParquetLike, **kw)

    @classmethod
    def orc_like(cls, **kw) -> "EncodingPolicy":
        return cls(EncodingStyle.OrcLike, **kw)

    @classmethod
    def plain_only(cls) -> "EncodingPolicy":
        return cls(EncodingStyle.PlainOnly)


class PageKind(enum.IntEnum):
    Plain = 0
    DictHybrid = 1
    OrcInt = 2
    ByteRleBool = 3
    DictOrc = 4


@dataclass(frozen=True, eq=False)
class Dictionary:
    entries: np.ndarray
    byte_size: int
    overflowed: bool = False

    def __len__(self):
        return len(self.entries)


@dataclass(frozen=True)
class PlainFallback:
    reason: str


@dataclass(frozen=True, eq=False)
class DictEncoding:
    """Result of :func:`dict_encode`: codes for rows before ``split_row``,
    plain spill for the rest."""

    dictionary: Dictionary
    codes: EncodedBlock
    split_row: int
    spill: bytes = b""


def _factorize(values: np.ndarray, logical_type: LogicalType):
    """First-appearance codes and the matching unique values."""
    if logical_type is LogicalType.Float64:
        codes, uniques = pd.factorize(values.view(np.int64), sort=False)
        return codes.astype(np.int64), np.asarray(uniques, dtype=np.int64).view(np.float64)
    if logical_type is LogicalType.Bool:
        codes, uniques = pd.factorize(values.view(np.uint8), sort=False)
        return codes.astype(np.int64), np.asarray(uniques).astype(np.bool_)
    codes, uniques = pd.factorize(values, sort=False)
    uniques = np.asarray(uniques, dtype=dtype_for(logical_type))
    return codes.astype(np.int64), uniques


@dataclass
class _DictPlan:
    codes: np.ndarray  # code per present value (only meaningful before split)
    entries: np.ndarray
    split_row: int  # rows at or after this index are plain
    overflowed: bool
    byte_size: int


def _plan_parquet_dict(col: ColumnVector, policy: EncodingPolicy, granularity: int) -> _DictPlan:
    present = col.present()
    codes, uniques = _factorize(present, col.logical_type)
    sizes = plain_entry_sizes(uniques, col.logical_type)
    cum = np.cumsum(sizes)
    over = np.flatnonzero(cum > policy.dict_size_limit_bytes)
    if len(over) == 0:
        return _DictPlan(codes, uniques, len(col), False, int(cum[-1]) if len(cum) else 0)
    rows_present = np.flatnonzero(col.validity)
    first_pos = np.unique(codes, return_index=True)[1]
    first_row = rows_present[first_pos]
    overflow_row = int(first_row[over[0]])
    split_row = (overflow_row // granularity) * granularity
    keep = int(np.searchsorted(first_row, split_row))
    entries = uniques[:keep]
    return _DictPlan(codes, entries, split_row, True, int(cum[keep - 1]) if keep else 0)


def dict_encode(col: ColumnVector, policy: EncodingPolicy):
    """Dictionary-encode a whole column, or report why the policy declines.

    ParquetLike builds a first-appearance dictionary until it would exceed
    the byte limit; present values from the overflow row on are spilled
    plain.  OrcLike dictionary-encodes strings only, and only when the
    column's NDV ratio is at most the threshold.
    """
    if len(col) == 0:
        raise InvalidConfig("dict_encode needs a non-empty column")
    if policy.style is EncodingStyle.PlainOnly:
        return PlainFallback("plain-only policy")
    if policy.style is EncodingStyle.OrcLike:
        if col.logical_type is not LogicalType.Utf8String:
            return PlainFallback("OrcLike dictionaries cover strings only")
        codes, uniques = _factorize(col.present(), col.logical_type)
        if len(uniques) / len(col) > policy.ndv_ratio_threshold:
            return PlainFallback("NDV ratio above threshold")
        size = int(plain_entry_sizes(uniques, col.logical_type).sum())
        return DictEncoding(Dictionary(uniques, size), orc_hybrid_encode(codes), len(col))
    plan = _plan_parquet_dict(col, policy, 1)
    n_before = int(np.count_nonzero(col.validity[:plan.split_row]))
    codes = rle_bp_hybrid_encode(plan.codes[:n_before], policy.rle_min_run)
    spill = plain_encode(col.present()[n_before:], col.logical_type) if plan.overflowed else b""
    return DictEncoding(Dictionary(plan.entries, plan.byte_size, plan.overflowed), codes,
                        plan.split_row, spill)


def dict_decode(encoding: DictEncoding, validity: np.ndarray, logical_type: LogicalType,
                policy: EncodingPolicy) -> ColumnVector:
    """Inverse of :func:`dict_encode` given the column's validity bitmap."""
    validity = np.asarray(validity, dtype=np.bool_)
    if policy.style is EncodingStyle.OrcLike:
        codes = orc_hybrid_decode(encoding.codes)
    else:
        codes = rle_bp_hybrid_decode(encoding.codes).astype(np.int64)
    head = encoding.dictionary.entries[codes]
    n_after = int(np.count_nonzero(validity)) - len(head)
    tail, _ = plain_decode(encoding.spill, n_after, logical_type) if n_after else (head[:0], 0)
    values = np.full(len(validity), PLACEHOLDERS[logical_type], dtype=dtype_for(logical_type))
    values[validity] = np.concatenate([head, tail]) if n_after else head
    return ColumnVector(logical_type, values, validity)


# ---------------------------------------------------------------------------
# dictionary pages

_DICT_PLAIN, _DICT_ORC_STRINGS = 0, 1


def encode_dictionary_page(entries: np.ndarray, logical_type: LogicalType, style: EncodingStyle) -> bytes:
    out = bytearray()
    if style is EncodingStyle.OrcLike and logical_type is LogicalType.Utf8String:
        out.append(_DICT_ORC_STRINGS)
        write_varint(out, len(entries))
        lengths, blob = encode_strings(entries)
        out += orc_hybrid_encode(lengths).to_bytes()
        out += blob
        return bytes(out)
    out.append(_DICT_PLAIN)
    write_varint(out, len(entries))
    out += plain_encode(entries, logical_type)
    return bytes(out)


def decode_dictionary_page(buf, logical_type: LogicalType) -> np.ndarray:
    if not buf:
        raise DecodeError("empty dictionary page")
    fmt = buf[0]
    count, pos = read_varint(buf, 1)
    if fmt == _DICT_ORC_STRINGS:
        block, pos = EncodedBlock.from_bytes(buf, pos)
        lengths = orc_hybrid_decode(block)
        if len(lengths) != count:
            raise DecodeError("dictionary length block mismatch")
        return decode_strings(bytes(buf[pos:pos + int(lengths.sum())]), lengths)
    entries, _ = plain_decode(buf, count, logical_type, pos)
    return entries


# ---------------------------------------------------------------------------
# pages and chunks


@dataclass(frozen=True)
class EncodedPage:
    data: bytes
    kind: PageKind
    row_count: int
    null_count: int


@dataclass(eq=False)
class EncodedChunk:
    logical_type: LogicalType
    scheme: Scheme
    dictionary: Dictionary | None
    dictionary_page: bytes | None
    pages: list = field(default_factory=list)
    page_row_starts: list = field(default_factory=list)

    @property
    def row_count(self) -> int:
        return sum(p.row_count for p in self.pages)

    @property
    def nbytes(self) -> int:
        return len(self.dictionary_page or b"") + sum(len(p.data) for p in self.pages)

    def to_bytes(self) -> bytes:
        out = bytearray([int(self.logical_type), int(self.scheme)])
        dict_page = self.dictionary_page or b""
        write_varint(out, len(dict_page))
        out += dict_page
        write_varint(out, len(self.pages))
        for page in self.pages:
            write_varint(out, len(page.data))
            out += page.data
        return bytes(out)


def _page_bytes(kind: PageKind, rows: int, validity: np.ndarray, body: bytes) -> bytes:
    out = bytearray([int(kind)])
    write_varint(out, rows)
    if validity.all():
        write_varint(out, 0)
    else:
        presence = presence_encode(validity)
        write_varint(out, len(presence))
        out += presence
    out += body
    return bytes(out)


def _value_page(kind: PageKind, present: np.ndarray, logical_type: LogicalType) -> bytes:
    if kind is PageKind.OrcInt:
        return orc_hybrid_encode(present).to_bytes()
    if kind is PageKind.ByteRleBool:
        return byte_rle_encode(np.packbits(present.astype(np.bool_), bitorder="little"))
    return plain_encode(present, logical_type)


def encode_column_chunk(col: ColumnVector, policy: EncodingPolicy, page_rows: int | None = None) -> EncodedChunk:
    """Encode one column chunk into a dictionary page plus data pages.

    Dispatch: ParquetLike sends every type through the dictionary with
    hybrid-coded codes (plain pages after an overflow); OrcLike uses the
    four-scheme encoder for integers, plain floats, byte-RLE booleans and
    the NDV-ratio-gated string dictionary; PlainOnly stores raw values.
    """
    n = len(col)
    page_rows = page_rows or max(n, 1)
    if page_rows <= 0:
        raise InvalidConfig("page_rows must be positive")
    starts = list(range(0, n, page_rows))
    lt = col.logical_type
    style = policy.style

    codes = entries = None
    dict_kind = None
    split_row = n
    dictionary = None
    if n and style is EncodingStyle.ParquetLike:
        plan = _plan_parquet_dict(col, policy, page_rows)
        if plan.split_row > 0:
            codes, entries, split_row = plan.codes, plan.entries, plan.split_row
            dictionary = Dictionary(entries, plan.byte_size, plan.overflowed)
            dict_kind = PageKind.DictHybrid
    elif n and style is EncodingStyle.OrcLike and lt is LogicalType.Utf8String:
        present = col.present()
        c, u = _factorize(present, lt)
        if len(u) / n <= policy.ndv_ratio_threshold:
            codes, entries = c, u
            size = int(plain_entry_sizes(u, lt).sum())
            dictionary = Dictionary(u, size)
            dict_kind = PageKind.DictOrc

    if style is EncodingStyle.OrcLike and lt is LogicalType.Int64:
        base_kind = PageKind.OrcInt
    elif style is EncodingStyle.OrcLike and lt is LogicalType.Bool:
        base_kind = PageKind.ByteRleBool
    else:
        base_kind = PageKind.Plain

    if codes is not None:
        # present-value offset of every page start
        present_before = np.concatenate(([0], np.cumsum(col.validity)))

    pages = []
    for start in starts:
        stop = min(start + page_rows, n)
        validity = col.validity[start:stop]
        rows = stop - start
        nulls = int(rows - np.count_nonzero(validity))
        if codes is not None and start < split_row:
            a, b = int(present_before[start]), int(present_before[stop])
            if dict_kind is PageKind.DictHybrid:
                body = rle_bp_hybrid_encode(codes[a:b], policy.rle_min_run).to_bytes()
            else:
                body = orc_hybrid_encode(codes[a:b]).to_bytes()
            kind = dict_kind
        else:
            present = col.values[start:stop][validity] if nulls else col.values[start:stop]
            kind = base_kind
            body = _value_page(kind, present, lt)
        pages.append(EncodedPage(_page_bytes(kind, rows, validity, body), kind, rows, nulls))

    if dictionary is not None:
        scheme = Scheme.Dict
        dict_page = encode_dictionary_page(dictionary.entries, lt, style)
    else:
        scheme = {PageKind.OrcInt: Scheme.OrcHybrid, PageKind.ByteRleBool: Scheme.ByteRle}.get(
            base_kind, Scheme.Plain)
        dict_page = None
    return EncodedChunk(lt, scheme, dictionary, dict_page, pages, starts)


def decode_page(data, logical_type: LogicalType, dictionary: np.ndarray | None = None) -> ColumnVector:
    buf = memoryview(data) if not isinstance(data, (bytes, bytearray)) else data
    if not buf:
        raise DecodeError("empty page")
    kind = PageKind(buf[0])
    rows, pos = read_varint(buf, 1)
    plen, pos = read_varint(buf, pos)
    if plen:
        validity = presence_decode(buf, pos, pos + plen)
        if len(validity) != rows:
            raise DecodeError("presence bitmap length mismatch")
        pos += plen
    else:
        validity = np.ones(rows, dtype=np.bool_)
    npresent = int(np.count_nonzero(validity))
    if kind in (PageKind.DictHybrid, PageKind.DictOrc):
        if dictionary is None:
            raise DecodeError("dictionary page missing")
        block, _ = EncodedBlock.from_bytes(buf, pos)
        if kind is PageKind.DictHybrid:
            codes = rle_bp_hybrid_decode(block).astype(np.int64)
        else:
            codes = orc_hybrid_decode(block)
        if len(codes) and (codes.max() >= len(dictionary) or codes.min() < 0):
            raise DecodeError("dictionary code out of range")
        present = dictionary[codes]
    elif kind is PageKind.OrcInt:
        block, _ = EncodedBlock.from_bytes(buf, pos)
        present = orc_hybrid_decode(block)
    elif kind is PageKind.ByteRleBool:
        packed, _ = byte_rle_decode(buf, -(-npresent // 8), pos)
        present = np.unpackbits(packed, bitorder="little", count=npresent).astype(np.bool_)
    else:
        present, _ = plain_decode(buf, npresent, logical_type, pos)
    if len(present) != npresent:
        raise DecodeError("page value count mismatch")
    if npresent == rows:
        return ColumnVector(logical_type, present, validity)
    values = np.full(rows, PLACEHOLDERS[logical_type], dtype=dtype_for(logical_type))
    values[validity] = present
    return ColumnVector(logical_type, values, validity)


def decode_column_chunk(data) -> ColumnVector:
    """Inverse of :meth:`EncodedChunk.to_bytes`."""
    lt = LogicalType(data[0])
    pos = 2
    dlen, pos = read_varint(data, pos)
    dictionary = decode_dictionary_page(data[pos:pos + dlen], lt) if dlen else None
    pos += dlen
    npages, pos = read_varint(data, pos)
    parts = []
    for _ in range(npages):
        plen, pos = read_varint(data, pos)
        parts.append(decode_page(data[pos:pos + plen], lt, dictionary))
        pos += plen
    return concat_columns(parts, lt)
