"""Byte layout of a PAXB file and its footer.

File::

    "PAXB" u16 version
    row group 0 .. row group n-1
    [centralized page index]
    footer
    u32 footer length | "PAXB"

Each row group is an optional page-index region (per-row-group placement)
followed, per column, by ``[dictionary][data stream][bloom]``.

The footer is a fixed header, then fixed-stride tables (schema, name hash
table, row-group directory, per-column-chunk slots, file zone refs) and a
heap of variable-length bytes the tables point into.  A column name resolves
with an expected O(1) probe of the hash table, and any column's slot is then
found with one multiplication, without touching other columns.
All integers are little-endian.
"""

from __future__ import annotations

import struct
import zlib
from dataclasses import dataclass
from typing import Any

from ..codecs import CodecId
from ..column import LogicalType
from ..encoders.bitpack import read_varint, write_varint
from ..encoders.block import Scheme
from ..encoders.chunk import EncodingStyle
from ..errors import BadMagic, DecodeError, IndexOutOfRange, TruncatedFile, UnsupportedVersion
from ..filters import ZoneMap
from .layout import BloomGranularity, ZoneLevel, ZonePlacement

MAGIC = b"PAXB"
VERSION = 1
PREAMBLE = struct.Struct("<4sH")
TRAILER = struct.Struct("<I4s")

HEADER = struct.Struct("<HBBBBBBQIIIdQQIIIIII")
SCHEMA_ENTRY = struct.Struct("<IIB")
NAME_ENTRY = struct.Struct("<I")
RG_ENTRY = struct.Struct("<QQQQQQ")
SLOT = struct.Struct("<QQBBBQIIQQIIQIQIQI")
ZONE_REF = struct.Struct("<II")

_HAS_DICT, _HAS_ZONE, _HAS_BLOOM, _HAS_PAGE_INDEX = 1, 2, 4, 8


# ---------------------------------------------------------------------------
# typed values and zone maps


def write_value(out: bytearray, value: Any, lt: LogicalType) -> None:
    if lt is LogicalType.Int64:
        out += struct.pack("<q", value)
    elif lt is LogicalType.Float64:
        out += struct.pack("<d", value)
    elif lt is LogicalType.Bool:
        out.append(1 if value else 0)
    else:
        raw = value.encode("utf-8")
        write_varint(out, len(raw))
        out += raw


def read_value(buf, pos: int, lt: LogicalType) -> tuple:
    if lt is LogicalType.Int64:
        return struct.unpack_from("<q", buf, pos)[0], pos + 8
    if lt is LogicalType.Float64:
        return struct.unpack_from("<d", buf, pos)[0], pos + 8
    if lt is LogicalType.Bool:
        return bool(buf[pos]), pos + 1
    n, pos = read_varint(buf, pos)
    if pos + n > len(buf):
        raise DecodeError("zone value truncated")
    return bytes(buf[pos:pos + n]).decode("utf-8"), pos + n


def write_zone(out: bytearray, zone: ZoneMap) -> None:
    out.append(1 if zone.has_values else 0)
    write_varint(out, zone.row_count)
    write_varint(out, zone.null_count)
    if zone.has_values:
        write_value(out, zone.min, zone.logical_type)
        write_value(out, zone.max, zone.logical_type)


def read_zone(buf, pos: int, lt: LogicalType) -> tuple:
    has_values = buf[pos]
    rows, pos = read_varint(buf, pos + 1)
    nulls, pos = read_varint(buf, pos)
    lo = hi = None
    if has_values:
        lo, pos = read_value(buf, pos, lt)
        hi, pos = read_value(buf, pos, lt)
    return ZoneMap(lt, rows, nulls, lo, hi), pos


def encode_zones(zones) -> bytes:
    out = bytearray()
    for z in zones:
        write_zone(out, z)
    return bytes(out)


def decode_zones(buf, count: int, lt: LogicalType) -> list:
    pos, zones = 0, []
    for _ in range(count):
        z, pos = read_zone(buf, pos, lt)
        zones.append(z)
    return zones


# ---------------------------------------------------------------------------
# column chunk metadata


@dataclass(frozen=True)
class PageEntry:
    """One data page; offset/length are relative to the chunk's data stream
    (the uncompressed stream when compression units straddle pages)."""

    row_count: int
    null_count: int
    offset: int
    length: int


@dataclass(frozen=True)
class CompressionUnit:
    raw_offset: int
    raw_length: int
    offset: int
    length: int


@dataclass(frozen=True)
class ColumnChunkMeta:
    offset: int
    length: int
    scheme: Scheme
    codec: CodecId
    data_offset: int
    data_length: int
    pages: tuple
    units: tuple = ()
    dict_offset: int | None = None
    dict_length: int = 0
    dict_raw_length: int = 0
    zone: ZoneMap | None = None
    # position within the page-index region (centralized section or row-group head)
    page_index_pos: int | None = None
    page_index_length: int = 0
    bloom_offset: int | None = None
    bloom_length: int = 0

    @property
    def row_count(self) -> int:
        return sum(p.row_count for p in self.pages)

    def page_row_starts(self) -> list:
        starts, acc = [], 0
        for p in self.pages:
            starts.append(acc)
            acc += p.row_count
        return starts


def encode_slot(meta: ColumnChunkMeta, heap: bytearray) -> bytes:
    blob = bytearray()
    if meta.zone is not None:
        write_zone(blob, meta.zone)
    for p in meta.pages:
        for v in (p.row_count, p.null_count, p.offset, p.length):
            write_varint(blob, v)
    for u in meta.units:
        for v in (u.raw_offset, u.raw_length, u.offset, u.length):
            write_varint(blob, v)
    heap_off = len(heap)
    heap += blob
    flags = ((_HAS_DICT if meta.dict_offset is not None else 0)
             | (_HAS_ZONE if meta.zone is not None else 0)
             | (_HAS_BLOOM if meta.bloom_offset is not None else 0)
             | (_HAS_PAGE_INDEX if meta.page_index_pos is not None else 0))
    return SLOT.pack(
        meta.offset, meta.length, int(meta.scheme), int(meta.codec), flags,
        meta.dict_offset or 0, meta.dict_length, meta.dict_raw_length,
        meta.data_offset, meta.data_length, len(meta.pages), len(meta.units),
        meta.page_index_pos or 0, meta.page_index_length,
        meta.bloom_offset or 0, meta.bloom_length,
        heap_off, len(blob),
    )


def decode_slot(buf, pos: int, heap_base: int, lt: LogicalType) -> ColumnChunkMeta:
    (offset, length, scheme, codec, flags, dict_off, dict_len, dict_raw, data_off, data_len,
     npages, nunits, pi_pos, pi_len, bloom_off, bloom_len, heap_off, heap_len) = SLOT.unpack_from(buf, pos)
    hp = heap_base + heap_off
    end = hp + heap_len
    if end > len(buf):
        raise TruncatedFile("footer heap truncated")
    zone = None
    if flags & _HAS_ZONE:
        zone, hp = read_zone(buf, hp, lt)
    pages = []
    for _ in range(npages):
        rows, hp = read_varint(buf, hp)
        nulls, hp = read_varint(buf, hp)
        off, hp = read_varint(buf, hp)
        ln, hp = read_varint(buf, hp)
        pages.append(PageEntry(rows, nulls, off, ln))
    units = []
    for _ in range(nunits):
        a, hp = read_varint(buf, hp)
        b, hp = read_varint(buf, hp)
        c, hp = read_varint(buf, hp)
        d, hp = read_varint(buf, hp)
        units.append(CompressionUnit(a, b, c, d))
    if hp != end:
        raise DecodeError("column metadata length mismatch")
    return ColumnChunkMeta(
        offset=offset, length=length, scheme=Scheme(scheme), codec=CodecId(codec),
        data_offset=data_off, data_length=data_len, pages=tuple(pages), units=tuple(units),
        dict_offset=dict_off if flags & _HAS_DICT else None, dict_length=dict_len, dict_raw_length=dict_raw,
        zone=zone,
        page_index_pos=pi_pos if flags & _HAS_PAGE_INDEX else None, page_index_length=pi_len,
        bloom_offset=bloom_off if flags & _HAS_BLOOM else None, bloom_length=bloom_len,
    )


# ---------------------------------------------------------------------------
# footer


@dataclass(frozen=True)
class RowGroupInfo:
    offset: int
    length: int
    row_count: int
    first_row: int
    index_offset: int
    index_length: int


@dataclass(frozen=True)
class FooterLayout:
    """Layout choices recorded in the footer so readers need no config."""

    placement: ZonePlacement
    zone_levels: frozenset
    bloom_granularity: BloomGranularity | None
    align_compression: bool
    codec: CodecId
    style: EncodingStyle
    page_rows: int
    bloom_fpp: float


_STYLE_CODES = {EncodingStyle.ParquetLike: 0, EncodingStyle.OrcLike: 1, EncodingStyle.PlainOnly: 2}
_STYLES = {v: k for k, v in _STYLE_CODES.items()}


def _name_table_size(ncols: int) -> int:
    """Power of two holding ``ncols`` names at load factor at most 1/2."""
    return 1 << max(1, (2 * ncols - 1).bit_length())


def build_name_table(names: list) -> bytes:
    """Open-addressing table of ``column index + 1`` keyed by crc32 of the
    UTF-8 name, with linear probing; 0 marks an empty entry."""
    size = _name_table_size(len(names))
    table = [0] * size
    for i, name in enumerate(names):
        pos = zlib.crc32(name.encode("utf-8")) & (size - 1)
        while table[pos]:
            pos = (pos + 1) & (size - 1)
        table[pos] = i + 1
    return struct.pack(f"<{size}I", *table)


def build_footer(schema, total_rows: int, row_groups, slots, file_zones, layout: FooterLayout,
                 page_index_offset: int, page_index_length: int) -> bytes:
    """Serialize a footer.  ``slots`` is ``[rg][col] -> ColumnChunkMeta``."""
    ncols, nrg = len(schema), len(row_groups)
    heap = bytearray()
    schema_tbl = bytearray()
    for name, lt in schema:
        raw = name.encode("utf-8")
        schema_tbl += SCHEMA_ENTRY.pack(len(heap), len(raw), int(lt))
        heap += raw
    names_tbl = build_name_table([name for name, _ in schema])
    rg_tbl = b"".join(RG_ENTRY.pack(g.offset, g.length, g.row_count, g.first_row, g.index_offset, g.index_length)
                      for g in row_groups)
    slot_tbl = bytearray()
    for rg_slots in slots:
        for meta in rg_slots:
            slot_tbl += encode_slot(meta, heap)
    zone_tbl = bytearray()
    if file_zones is not None:
        for z in file_zones:
            start = len(heap)
            write_zone(heap, z)
            zone_tbl += ZONE_REF.pack(start, len(heap) - start)
    levels = sum(level.value for level in layout.zone_levels)
    gran = 0 if layout.bloom_granularity is None else layout.bloom_granularity.value
    schema_off = HEADER.size
    names_off = schema_off + len(schema_tbl)
    rg_off = names_off + len(names_tbl)
    slots_off = rg_off + len(rg_tbl)
    zones_off = slots_off + len(slot_tbl)
    heap_off = zones_off + len(zone_tbl)
    header = HEADER.pack(
        VERSION, layout.placement.value, levels, gran, int(layout.align_compression), int(layout.codec),
        _STYLE_CODES[layout.style], total_rows, ncols, nrg, layout.page_rows, layout.bloom_fpp,
        page_index_offset, page_index_length,
        schema_off, names_off, rg_off, slots_off, zones_off if file_zones is not None else 0, heap_off,
    )
    return header + bytes(schema_tbl) + names_tbl + rg_tbl + bytes(slot_tbl) + bytes(zone_tbl) + bytes(heap)


class FileFooter:
    """Parsed footer header plus lazily decoded tables.

    Opening a footer costs O(row groups); schema, names and column metadata
    are decoded on demand straight from fixed-stride tables.
    """

    def __init__(self, raw: bytes):
        self.raw = bytes(raw)
        if len(self.raw) < HEADER.size:
            raise TruncatedFile("footer shorter than its header")
        (version, placement, levels, gran, align, codec, style, total_rows, ncols, nrg, page_rows, fpp,
         pi_off, pi_len, schema_off, names_off, rg_off, slots_off, zones_off, heap_off) = HEADER.unpack_from(self.raw)
        if version != VERSION:
            raise UnsupportedVersion(f"footer version {version}, expected {VERSION}")
        self.version = version
        self.total_rows = total_rows
        self.num_columns = ncols
        self.num_row_groups = nrg
        self.page_index_offset = pi_off
        self.page_index_length = pi_len
        try:
            self.layout = FooterLayout(
                placement=ZonePlacement(placement),
                zone_levels=frozenset(level for level in ZoneLevel if levels & level.value),
                bloom_granularity=BloomGranularity(gran) if gran else None,
                align_compression=bool(align),
                codec=CodecId(codec),
                style=_STYLES[style],
                page_rows=page_rows,
                bloom_fpp=fpp,
            )
        except (ValueError, KeyError) as exc:
            raise DecodeError(f"bad footer header: {exc}") from exc
        self._schema_off, self._names_off, self._rg_off = schema_off, names_off, rg_off
        self._name_slots = (rg_off - names_off) // NAME_ENTRY.size
        if self._name_slots < 1 or self._name_slots & (self._name_slots - 1):
            raise DecodeError("name table size is not a power of two")
        self._slots_off, self._zones_off, self._heap_off = slots_off, zones_off, heap_off
        need = max(slots_off + nrg * ncols * SLOT.size, heap_off)
        if need > len(self.raw) or heap_off < slots_off:
            raise TruncatedFile("footer tables truncated")
        self.row_groups = [RowGroupInfo(*RG_ENTRY.unpack_from(self.raw, rg_off + i * RG_ENTRY.size))
                           for i in range(nrg)]
        self._schema_cache = None

    # -- schema
    def column_name(self, i: int) -> str:
        self._check_col(i)
        off, ln, _ = SCHEMA_ENTRY.unpack_from(self.raw, self._schema_off + i * SCHEMA_ENTRY.size)
        start = self._heap_off + off
        return self.raw[start:start + ln].decode("utf-8")

    def column_type(self, i: int) -> LogicalType:
        self._check_col(i)
        return LogicalType(self.raw[self._schema_off + i * SCHEMA_ENTRY.size + 8])

    @property
    def schema(self) -> list:
        if self._schema_cache is None:
            self._schema_cache = [(self.column_name(i), self.column_type(i)) for i in range(self.num_columns)]
        return self._schema_cache

    @property
    def names(self) -> list:
        return [name for name, _ in self.schema]

    def column_index(self, name: str) -> int:
        """Probe the name hash table; raises KeyError."""
        target = name.encode("utf-8")
        size = self._name_slots
        pos = zlib.crc32(target) & (size - 1)
        for _ in range(size):
            (entry,) = NAME_ENTRY.unpack_from(self.raw, self._names_off + pos * NAME_ENTRY.size)
            if entry == 0:
                break
            off, ln, _ = SCHEMA_ENTRY.unpack_from(self.raw, self._schema_off + (entry - 1) * SCHEMA_ENTRY.size)
            start = self._heap_off + off
            if self.raw[start:start + ln] == target:
                return entry - 1
            pos = (pos + 1) & (size - 1)
        raise KeyError(name)

    # -- metadata
    def _check_col(self, i: int) -> None:
        if not 0 <= i < self.num_columns:
            raise IndexOutOfRange(f"column {i} out of range [0, {self.num_columns})")

    def slot_position(self, row_group: int, column: int) -> int:
        if not 0 <= row_group < self.num_row_groups:
            raise IndexOutOfRange(f"row group {row_group} out of range [0, {self.num_row_groups})")
        self._check_col(column)
        return self._slots_off + (row_group * self.num_columns + column) * SLOT.size

    def file_zone_map(self, column: int) -> ZoneMap | None:
        self._check_col(column)
        if not self._zones_off:
            return None
        off, _ = ZONE_REF.unpack_from(self.raw, self._zones_off + column * ZONE_REF.size)
        zone, _ = read_zone(self.raw, self._heap_off + off, self.column_type(column))
        return zone

    def __eq__(self, other):
        return isinstance(other, FileFooter) and self.raw == other.raw

    def __hash__(self):
        return hash(self.raw)

    def __repr__(self):
        return (f"FileFooter(version={self.version}, rows={self.total_rows}, columns={self.num_columns}, "
                f"row_groups={self.num_row_groups})")


def read_column_meta(footer: FileFooter, row_group_idx: int, column_idx: int) -> ColumnChunkMeta:
    """Constant-time lookup of one column chunk's metadata."""
    pos = footer.slot_position(row_group_idx, column_idx)
    return decode_slot(footer.raw, pos, footer._heap_off, footer.column_type(column_idx))


def parse_footer_sequential(footer: FileFooter) -> list:
    """Decode the whole footer front to back, the way a serialized footer
    without random access must be read.  Returns ``[rg][col]`` metadata."""
    buf = footer.raw
    types = []
    pos = footer._schema_off
    for _ in range(footer.num_columns):
        off, ln, lt = SCHEMA_ENTRY.unpack_from(buf, pos)
        buf[footer._heap_off + off:footer._heap_off + off + ln].decode("utf-8")
        types.append(LogicalType(lt))
        pos += SCHEMA_ENTRY.size
    out = []
    pos = footer._slots_off
    for _ in range(footer.num_row_groups):
        row = []
        for c in range(footer.num_columns):
            row.append(decode_slot(buf, pos, footer._heap_off, types[c]))
            pos += SLOT.size
        out.append(row)
    return out


def read_column_meta_sequential(footer: FileFooter, row_group_idx: int, column_idx: int) -> ColumnChunkMeta:
    footer.slot_position(row_group_idx, column_idx)
    return parse_footer_sequential(footer)[row_group_idx][column_idx]


def parse_trailer(tail: bytes, file_size: int) -> int:
    """Validate the 8-byte trailer; returns the footer length."""
    if file_size < PREAMBLE.size + TRAILER.size:
        raise TruncatedFile(f"file of {file_size} bytes is too short")
    length, magic = TRAILER.unpack(tail)
    if magic != MAGIC:
        raise BadMagic(f"trailing magic {magic!r}")
    if length < HEADER.size or length > file_size - PREAMBLE.size - TRAILER.size:
        raise TruncatedFile(f"footer length {length} does not fit in {file_size} bytes")
    return length


def parse_preamble(head: bytes) -> None:
    magic, version = PREAMBLE.unpack(head)
    if magic != MAGIC:
        raise BadMagic(f"leading magic {magic!r}")
    if version != VERSION:
        raise UnsupportedVersion(f"file version {version}, expected {VERSION}")

