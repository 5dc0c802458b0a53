from __future__ import annotations

import io
import os
import struct

import numpy as np

from ..codecs import CodecId, compress
from ..column import ColumnVector, LogicalType, Table
from ..encoders.bitpack import bit_width
from ..encoders.chunk import EncodingStyle, _factorize, encode_column_chunk
from ..encoders.plain import plain_entry_sizes
from ..errors import InvalidConfig
from ..filters import ZoneMap, build_bloom
from .format import (
    MAGIC, PREAMBLE, TRAILER, VERSION, ColumnChunkMeta, CompressionUnit, FileFooter, FooterLayout, PageEntry,
    RowGroupInfo, build_footer, encode_zones,
)
from .layout import BloomGranularity, FileLayoutConfig, RowGroupKind, ZoneLevel, ZonePlacement

SLACK = 1.10


# ---------------------------------------------------------------------------
# row-group partitioning


def _column_page_estimates(col: ColumnVector, cfg: FileLayoutConfig, page_starts: np.ndarray,
                           group_of_page: np.ndarray) -> np.ndarray:
    """Estimated encoded bytes of every page of ``col``.

    Pages without a dictionary are estimated independently.  Dictionary
    columns pay for entries first seen in the current row group plus
    bit-packed codes; the seen-set resets at each row-group boundary.
    """
    n = len(col)
    lt = col.logical_type
    style = cfg.encoding_policy.style
    stops = np.append(page_starts[1:], n)
    present_before = np.concatenate(([0], np.cumsum(col.validity)))
    npresent = present_before[stops] - present_before[page_starts]
    rows = stops - page_starts
    est = np.where(npresent < rows, rows / 8.0, 0.0) + 4
    present = col.present()

    dict_coded = n > 0 and (style is EncodingStyle.ParquetLike
                            or (style is EncodingStyle.OrcLike and lt is LogicalType.Utf8String))
    if dict_coded:
        codes, uniques = _factorize(present, lt)
        dict_coded = style is EncodingStyle.ParquetLike or len(uniques) / n <= cfg.encoding_policy.ndv_ratio_threshold
    if dict_coded:
        sizes = plain_entry_sizes(uniques, lt)
        seen = np.zeros(len(uniques), dtype=np.bool_)
        seen_count = 0
        current = -1
        for i in range(len(page_starts)):
            if group_of_page[i] != current:
                current = group_of_page[i]
                seen[:] = False
                seen_count = 0
            page_codes = np.unique(codes[present_before[page_starts[i]]:present_before[stops[i]]])
            new = page_codes[~seen[page_codes]]
            seen[new] = True
            seen_count += len(new)
            est[i] += sizes[new].sum() + npresent[i] * bit_width(max(seen_count - 1, 0)) / 8.0
        return est

    if lt is LogicalType.Int64 and style is EncodingStyle.OrcLike:
        for i in range(len(page_starts)):
            vals = present[present_before[page_starts[i]]:present_before[stops[i]]]
            if len(vals):
                span = int(vals.max()) - int(vals.min())
                est[i] += len(vals) * bit_width(span) / 8.0
        return est
    if lt is LogicalType.Bool:
        return est + (npresent / 8.0 if style is EncodingStyle.OrcLike else npresent)
    if lt is LogicalType.Utf8String:
        cum = np.concatenate(([0], np.cumsum(plain_entry_sizes(present, lt))))
        return est + cum[present_before[stops]] - cum[present_before[page_starts]]
    return est + 8.0 * npresent


def row_group_bounds(table: Table, cfg: FileLayoutConfig) -> list:
    """``[(start, stop), ...]`` row ranges of the row groups."""
    n = table.row_count
    mode = cfg.row_group_mode
    if n == 0:
        return []
    if mode.kind is RowGroupKind.FixedRows:
        return [(s, min(s + mode.value, n)) for s in range(0, n, mode.value)]
    page_starts = np.arange(0, n, cfg.page_rows)
    # first pass assumes one group so dictionary estimates are pessimistic
    # only at the true cut points; a second pass re-estimates with the cuts
    groups = np.zeros(len(page_starts), dtype=np.int64)
    for _ in range(2):
        per_page = sum(_column_page_estimates(col, cfg, page_starts, groups) for _, col in table.columns)
        new_groups = np.zeros_like(groups)
        acc, g = 0.0, 0
        for i, size in enumerate(per_page):
            if acc > 0 and (acc + size) * SLACK > mode.value:
                g += 1
                acc = 0.0
            acc += size
            new_groups[i] = g
        if np.array_equal(new_groups, groups):
            break
        groups = new_groups
    bounds = []
    for g in range(int(groups[-1]) + 1):
        idx = np.flatnonzero(groups == g)
        start = int(page_starts[idx[0]])
        stop = int(page_starts[idx[-1] + 1]) if idx[-1] + 1 < len(page_starts) else n
        bounds.append((start, stop))
    return bounds


# ---------------------------------------------------------------------------
# chunk serialization


def _bloom_blob(col: ColumnVector, starts: list, page_rows: int, cfg: FileLayoutConfig) -> bytes:
    if cfg.bloom.granularity is BloomGranularity.ColumnChunk:
        return build_bloom(col, cfg.bloom.fpp).to_bytes()
    filters = [build_bloom(col.slice(s, min(s + page_rows, len(col))), cfg.bloom.fpp).to_bytes() for s in starts]
    head = struct.pack("<I", len(filters)) + b"".join(struct.pack("<I", len(f)) for f in filters)
    return head + b"".join(filters)


class _ChunkParts:
    __slots__ = ("dict_bytes", "dict_raw_length", "stream", "pages", "units", "zone", "page_zones", "bloom",
                 "scheme")


def _serialize_chunk(col: ColumnVector, cfg: FileLayoutConfig) -> _ChunkParts:
    chunk = encode_column_chunk(col, cfg.encoding_policy, cfg.page_rows)
    n = len(col)
    parts = _ChunkParts()
    parts.scheme = chunk.scheme
    parts.page_zones = [ZoneMap.of(col.slice(s, min(s + cfg.page_rows, n))) for s in chunk.page_row_starts]
    parts.zone = ZoneMap.merge(parts.page_zones) if parts.page_zones else ZoneMap.of(col)
    codec = cfg.codec
    raw_dict = chunk.dictionary_page
    parts.dict_raw_length = len(raw_dict) if raw_dict is not None else 0
    if raw_dict is None:
        parts.dict_bytes = None
    else:
        parts.dict_bytes = raw_dict if codec is CodecId.None_ else compress(codec, raw_dict)

    raw_pages = [p.data for p in chunk.pages]
    pages, units = [], []
    if codec is CodecId.None_ or cfg.align_compression_to_page:
        stored = raw_pages if codec is CodecId.None_ else [compress(codec, d) for d in raw_pages]
        off = 0
        for page, data in zip(chunk.pages, stored):
            pages.append(PageEntry(page.row_count, page.null_count, off, len(data)))
            off += len(data)
        parts.stream = b"".join(stored)
    else:
        raw = b"".join(raw_pages)
        off = 0
        for page, data in zip(chunk.pages, raw_pages):
            pages.append(PageEntry(page.row_count, page.null_count, off, len(data)))
            off += len(data)
        out = []
        disk = 0
        step = cfg.compression_unit_bytes
        for a in range(0, len(raw), step):
            piece = compress(codec, raw[a:a + step])
            units.append(CompressionUnit(a, min(step, len(raw) - a), disk, len(piece)))
            out.append(piece)
            disk += len(piece)
        parts.stream = b"".join(out)
    parts.pages, parts.units = pages, units
    parts.bloom = _bloom_blob(col, chunk.page_row_starts, cfg.page_rows, cfg) if cfg.bloom.enabled and n else None
    return parts


class _Sink:
    def __init__(self, fh):
        self.fh = fh
        self.pos = 0

    def write(self, data) -> None:
        self.fh.write(data)
        self.pos += len(data)


def write_table(table: Table, cfg: FileLayoutConfig, sink) -> FileFooter:
    """Write ``table`` to ``sink`` (a path or a writable binary file object)."""
    if not table.columns:
        raise InvalidConfig("cannot write a table without columns")
    for name, col in table.columns:
        if not isinstance(col.logical_type, LogicalType):
            raise InvalidConfig(f"column {name!r} has unsupported type {col.logical_type!r}")
    if isinstance(sink, (str, os.PathLike)):
        with open(sink, "wb") as fh:
            return _write(table, cfg, _Sink(fh))
    return _write(table, cfg, _Sink(sink))


def write_table_bytes(table: Table, cfg: FileLayoutConfig) -> tuple:
    buf = io.BytesIO()
    footer = write_table(table, cfg, buf)
    return buf.getvalue(), footer


def _write(table: Table, cfg: FileLayoutConfig, out: _Sink) -> FileFooter:
    levels = cfg.zone_map_levels
    page_level = ZoneLevel.Page in levels
    per_rg_index = page_level and cfg.zone_map_placement is ZonePlacement.PerRowGroup
    out.write(PREAMBLE.pack(MAGIC, VERSION))

    row_groups, slots = [], []
    chunk_zones = [[] for _ in table.columns]
    central = bytearray()
    for start, stop in row_group_bounds(table, cfg):
        parts = [_serialize_chunk(col.slice(start, stop), cfg) for _, col in table.columns]
        index = bytearray()
        index_pos = []
        for p in parts:
            if not page_level:
                index_pos.append(None)
                continue
            target = index if per_rg_index else central
            index_pos.append(len(target))
            target += encode_zones(p.page_zones)

        rg_offset = out.pos
        if index:
            out.write(bytes(index))
        metas = []
        for c, p in enumerate(parts):
            chunk_offset = out.pos
            dict_offset = None
            if p.dict_bytes is not None:
                dict_offset = out.pos
                out.write(p.dict_bytes)
            data_offset = out.pos
            out.write(p.stream)
            bloom_offset = None
            if p.bloom is not None:
                bloom_offset = out.pos
                out.write(p.bloom)
            chunk_zones[c].append(p.zone)
            pi_len = 0
            if index_pos[c] is not None:
                pi_len = len(encode_zones(p.page_zones))
            metas.append(ColumnChunkMeta(
                offset=chunk_offset, length=data_offset + len(p.stream) - chunk_offset,
                scheme=p.scheme, codec=cfg.codec,
                data_offset=data_offset, data_length=len(p.stream),
                pages=tuple(p.pages), units=tuple(p.units),
                dict_offset=dict_offset, dict_length=len(p.dict_bytes or b""), dict_raw_length=p.dict_raw_length,
                zone=p.zone if ZoneLevel.RowGroup in levels else None,
                page_index_pos=index_pos[c], page_index_length=pi_len,
                bloom_offset=bloom_offset, bloom_length=len(p.bloom or b""),
            ))
        first_row = start
        row_groups.append(RowGroupInfo(rg_offset, out.pos - rg_offset, stop - start, first_row,
                                       rg_offset if index else 0, len(index)))
        slots.append(metas)

    pi_offset = out.pos if central else 0
    if central:
        out.write(bytes(central))
    file_zones = None
    if ZoneLevel.File in levels:
        file_zones = [ZoneMap.merge(zs) if zs else ZoneMap(col.logical_type, 0, 0)
                      for zs, (_, col) in zip(chunk_zones, table.columns)]
    layout = FooterLayout(
        placement=cfg.zone_map_placement,
        zone_levels=levels,
        bloom_granularity=cfg.bloom.granularity if cfg.bloom.enabled else None,
        align_compression=cfg.align_compression_to_page,
        codec=cfg.codec,
        style=cfg.encoding_policy.style,
        page_rows=cfg.page_rows,
        bloom_fpp=cfg.bloom.fpp,
    )
    footer = build_footer(table.schema, table.row_count, row_groups, slots, file_zones, layout,
                          pi_offset, len(central))
    out.write(footer)
    out.write(TRAILER.pack(len(footer), MAGIC))
    return FileFooter(footer)

