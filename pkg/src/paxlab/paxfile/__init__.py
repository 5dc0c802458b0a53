from .format import (
    MAGIC, VERSION, ColumnChunkMeta, CompressionUnit, FileFooter, PageEntry, RowGroupInfo, parse_footer_sequential,
    read_column_meta, read_column_meta_sequential,
)
from .layout import (
    BloomConfig, BloomGranularity, FileLayoutConfig, FormatPreset, RowGroupKind, RowGroupMode, ZoneLevel,
    ZonePlacement,
)
from .reader import IOCounters, PaxReader, open_reader, read_footer, scan_table
from .writer import row_group_bounds, write_table, write_table_bytes

__all__ = [
    "MAGIC", "VERSION", "ColumnChunkMeta", "CompressionUnit", "FileFooter", "PageEntry", "RowGroupInfo",
    "parse_footer_sequential", "read_column_meta", "read_column_meta_sequential",
    "BloomConfig", "BloomGranularity", "FileLayoutConfig", "FormatPreset", "RowGroupKind", "RowGroupMode",
    "ZoneLevel", "ZonePlacement",
    "IOCounters", "PaxReader", "open_reader", "read_footer", "scan_table",
    "row_group_bounds", "write_table", "write_table_bytes",
]
