"""File reader with read-request accounting.

Every byte range fetched from the source counts as one read operation;
adjacent ranges requested together are coalesced into one.  The counters
stand in for object-store GET requests and transferred bytes.
"""

from __future__ import annotations

import mmap
import os
import struct
from dataclasses import dataclass

import numpy as np

from ..codecs import CodecId, decompress
from ..column import ColumnVector, Table, concat_columns, dtype_for
from ..encoders.chunk import decode_dictionary_page, decode_page
from ..errors import DecodeError, InvalidProjection, PaxError, TruncatedFile
from ..filters import SplitBlockBloomFilter
from .format import (
    PREAMBLE, TRAILER, ColumnChunkMeta, FileFooter, decode_zones, parse_preamble, parse_trailer, read_column_meta,
)
from .layout import BloomGranularity, ZoneLevel, ZonePlacement


@dataclass
class IOCounters:
    read_ops: int = 0
    bytes_read: int = 0

    def reset(self) -> None:
        self.read_ops = 0
        self.bytes_read = 0

    def snapshot(self) -> "IOCounters":
        return IOCounters(self.read_ops, self.bytes_read)


def _coalesce(ranges: list) -> list:
    """Merge touching ``(offset, length)`` ranges (input sorted)."""
    merged = []
    for off, ln in ranges:
        if merged and merged[-1][0] + merged[-1][1] == off:
            merged[-1][1] += ln
        else:
            merged.append([off, ln])
    return merged


class PaxReader:
    def __init__(self, source):
        self._fh = None
        self._mm = None
        if isinstance(source, (str, os.PathLike)):
            self._fh = open(source, "rb")
            size = os.fstat(self._fh.fileno()).st_size
            if size:
                self._mm = mmap.mmap(self._fh.fileno(), 0, access=mmap.ACCESS_READ)
                self._buf = memoryview(self._mm)
            else:
                self._buf = memoryview(b"")
        elif isinstance(source, (bytes, bytearray, memoryview)):
            self._buf = memoryview(source)
        else:
            raise TypeError(f"unsupported source {type(source).__name__}")
        self.size = len(self._buf)
        self.counters = IOCounters()
        if self.size < PREAMBLE.size + TRAILER.size:
            self.close()
            raise TruncatedFile(f"file of {self.size} bytes is too short")
        try:
            length = parse_trailer(bytes(self.read_at(self.size - TRAILER.size, TRAILER.size)), self.size)
            parse_preamble(bytes(self.read_at(0, PREAMBLE.size)))
            self.footer = FileFooter(self.read_at(self.size - TRAILER.size - length, length))
        except PaxError:
            self.close()
            raise
        except struct.error as exc:
            self.close()
            raise TruncatedFile(str(exc)) from exc
        self._metas: dict = {}
        self._regions: dict = {}
        self._dicts: dict = {}

    # -- raw access
    def read_at(self, offset: int, length: int) -> memoryview:
        if offset < 0 or offset + length > self.size:
            raise TruncatedFile(f"range [{offset}, {offset + length}) beyond file size {self.size}")
        self.counters.read_ops += 1
        self.counters.bytes_read += length
        return self._buf[offset:offset + length]

    def close(self) -> None:
        self._buf = memoryview(b"")
        if self._mm is not None:
            try:
                self._mm.close()
            except BufferError:
                pass
            self._mm = None
        if self._fh is not None:
            self._fh.close()
            self._fh = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    # -- metadata
    @property
    def row_count(self) -> int:
        return self.footer.total_rows

    @property
    def num_row_groups(self) -> int:
        return self.footer.num_row_groups

    def column_index(self, name: str) -> int:
        try:
            return self.footer.column_index(name)
        except KeyError:
            raise InvalidProjection(f"no column named {name!r}") from None

    def meta(self, rg: int, col: int) -> ColumnChunkMeta:
        key = (rg, col)
        if key not in self._metas:
            self._metas[key] = read_column_meta(self.footer, rg, col)
        return self._metas[key]

    def page_zone_maps(self, rg: int, col: int):
        """Page zone maps of one chunk, or None when not recorded.

        The centralized section is fetched once for the whole file; the
        per-row-group placement costs one fetch per row group touched.
        """
        meta = self.meta(rg, col)
        if meta.page_index_pos is None:
            return None
        if self.footer.layout.placement is ZonePlacement.CentralizedFooter:
            key = "central"
            base, length = self.footer.page_index_offset, self.footer.page_index_length
        else:
            info = self.footer.row_groups[rg]
            key = ("rg", rg)
            base, length = info.index_offset, info.index_length
        if key not in self._regions:
            self._regions[key] = bytes(self.read_at(base, length))
        region = self._regions[key]
        raw = region[meta.page_index_pos:meta.page_index_pos + meta.page_index_length]
        return decode_zones(raw, len(meta.pages), self.footer.column_type(col))

    def has_zone_level(self, level: ZoneLevel) -> bool:
        return level in self.footer.layout.zone_levels

    def bloom_filters(self, rg: int, col: int):
        """``(granularity, [filters])`` for a chunk, or None."""
        meta = self.meta(rg, col)
        gran = self.footer.layout.bloom_granularity
        if meta.bloom_offset is None or gran is None:
            return None
        blob = bytes(self.read_at(meta.bloom_offset, meta.bloom_length))
        if gran is BloomGranularity.ColumnChunk:
            return gran, [SplitBlockBloomFilter.from_bytes(blob)]
        (count,) = struct.unpack_from("<I", blob, 0)
        lengths = struct.unpack_from(f"<{count}I", blob, 4)
        pos = 4 + 4 * count
        filters = []
        for ln in lengths:
            filters.append(SplitBlockBloomFilter.from_bytes(blob[pos:pos + ln]))
            pos += ln
        return gran, filters

    # -- data
    def _dictionary(self, rg: int, col: int, meta: ColumnChunkMeta, raw=None):
        key = (rg, col)
        if key in self._dicts:
            return self._dicts[key]
        if meta.dict_offset is None:
            return None
        if raw is None:
            raw = self.read_at(meta.dict_offset, meta.dict_length)
        try:
            data = bytes(raw) if meta.codec is CodecId.None_ else decompress(meta.codec, raw)
            entries = decode_dictionary_page(data, self.footer.column_type(col))
        except PaxError as exc:
            raise DecodeError(f"dictionary: {exc}", rg, col, None) from exc
        self._dicts[key] = entries
        return entries

    def read_pages(self, rg: int, col: int, page_ids) -> list:
        """Decode the listed pages of one chunk, fetching only their bytes."""
        meta = self.meta(rg, col)
        lt = self.footer.column_type(col)
        page_ids = sorted(set(int(p) for p in page_ids))
        if not page_ids:
            return []
        if page_ids[0] < 0 or page_ids[-1] >= len(meta.pages):
            raise DecodeError("page index out of range", rg, col, page_ids[-1])
        unit_mode = bool(meta.units)
        if unit_mode:
            unit_ids = set()
            ends = np.array([u.raw_offset + u.raw_length for u in meta.units])
            for p in page_ids:
                e = meta.pages[p]
                first = int(np.searchsorted(ends, e.offset, side="right"))
                last = int(np.searchsorted(ends, e.offset + e.length - 1, side="right"))
                unit_ids.update(range(first, last + 1))
            unit_ids = sorted(unit_ids)
            pieces = [(meta.data_offset + meta.units[u].offset, meta.units[u].length) for u in unit_ids]
        else:
            pieces = [(meta.data_offset + meta.pages[p].offset, meta.pages[p].length) for p in page_ids]
        need_dict = meta.dict_offset is not None and (rg, col) not in self._dicts
        if need_dict:
            pieces = [(meta.dict_offset, meta.dict_length)] + pieces

        fetched = {}
        for off, ln in _coalesce(pieces):
            view = self.read_at(off, ln)
            fetched[off] = view

        def slice_of(off: int, ln: int):
            for start, view in fetched.items():
                if start <= off and off + ln <= start + len(view):
                    return view[off - start:off - start + ln]
            raise DecodeError("internal: range not fetched", rg, col, None)

        dictionary = None
        if meta.dict_offset is not None:
            raw = slice_of(meta.dict_offset, meta.dict_length) if need_dict else None
            dictionary = self._dictionary(rg, col, meta, raw)

        out = []
        if unit_mode:
            raw_units = {}
            for u in unit_ids:
                unit = meta.units[u]
                try:
                    raw_units[u] = decompress(meta.codec, slice_of(meta.data_offset + unit.offset, unit.length))
                except PaxError as exc:
                    raise DecodeError(str(exc), rg, col, None) from exc
            for p in page_ids:
                e = meta.pages[p]
                buf = bytearray()
                for u in unit_ids:
                    unit = meta.units[u]
                    a = max(e.offset, unit.raw_offset)
                    b = min(e.offset + e.length, unit.raw_offset + unit.raw_length)
                    if a < b:
                        buf += raw_units[u][a - unit.raw_offset:b - unit.raw_offset]
                out.append(self._decode(bytes(buf), lt, dictionary, e, rg, col, p))
        else:
            for p in page_ids:
                e = meta.pages[p]
                data = slice_of(meta.data_offset + e.offset, e.length)
                if meta.codec is not CodecId.None_:
                    try:
                        data = decompress(meta.codec, data)
                    except PaxError as exc:
                        raise DecodeError(str(exc), rg, col, p) from exc
                out.append(self._decode(data, lt, dictionary, e, rg, col, p))
        return out

    @staticmethod
    def _decode(data, lt, dictionary, entry, rg, col, page) -> ColumnVector:
        try:
            vec = decode_page(data, lt, dictionary)
        except DecodeError as exc:
            raise DecodeError(str(exc), rg, col, page) from exc
        except (ValueError, IndexError, struct.error, UnicodeDecodeError) as exc:
            raise DecodeError(f"corrupt page: {exc}", rg, col, page) from exc
        if len(vec) != entry.row_count:
            raise DecodeError("page row count mismatch", rg, col, page)
        return vec

    def read_chunk(self, rg: int, col: int) -> ColumnVector:
        meta = self.meta(rg, col)
        parts = self.read_pages(rg, col, range(len(meta.pages)))
        return concat_columns(parts, self.footer.column_type(col))

    def resolve_projection(self, projection) -> list:
        if projection is None:
            return list(range(self.footer.num_columns))
        projection = list(projection)
        if not projection:
            raise InvalidProjection("projection must name at least one column")
        if len(set(projection)) != len(projection):
            raise InvalidProjection("duplicate column in projection")
        return [self.column_index(name) for name in projection]

    def scan(self, projection=None) -> Table:
        cols = self.resolve_projection(projection)
        columns = []
        for c in cols:
            lt = self.footer.column_type(c)
            parts = [self.read_chunk(rg, c) for rg in range(self.num_row_groups)]
            if parts:
                vec = concat_columns(parts, lt)
            else:
                vec = ColumnVector(lt, np.empty(0, dtype=dtype_for(lt)), np.empty(0, dtype=np.bool_))
            columns.append((self.footer.column_name(c), vec))
        return Table(columns)


def open_reader(source) -> PaxReader:
    return source if isinstance(source, PaxReader) else PaxReader(source)


def read_footer(source) -> FileFooter:
    if isinstance(source, PaxReader):
        return source.footer
    reader = PaxReader(source)
    footer = reader.footer
    reader.close()
    return footer


def scan_table(source, projection=None) -> Table:
    reader = open_reader(source)
    try:
        return reader.scan(projection)
    finally:
        if reader is not source:
            reader.close()
