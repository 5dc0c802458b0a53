"""paxlab: a small PAX columnar storage lab.

Synthetic skewed workloads, Parquet-like and ORC-like encodings, a
self-describing file format with zone maps and Bloom filters, a pruning
scan engine, and two nested-data shredding models.
"""

from .codecs import CodecId
from .column import (
    ColumnStats, ColumnVector, LogicalType, SkewCategory, Table, compute_ndv, compute_ndv_ratio, compute_null_ratio,
    compute_sortedness, compute_stats, fit_zipf_s,
)
from .errors import (
    BadMagic, DecodeError, EmptyColumn, EncodingOverflow, IndexOutOfRange, InvalidConfig, InvalidLevels,
    InvalidProjection, NotEnoughValues, PaxError, SchemaMismatch, TruncatedFile, TypeMismatch, UnsupportedVersion,
)
from .filters import SplitBlockBloomFilter, ZoneMap, zone_prune
from .paxfile import FileLayoutConfig, FormatPreset, PaxReader, read_footer, scan_table, write_table
from .predicates import PredicateOp, PredicateSpec
from .scan import (
    ScanStats, SelectionBitvector, Strategy, StrategyConfig, choose_strategy, project_with_bitvector, query, select,
)
from .workload import ColumnConfig, WorkloadSpec, generate_column, generate_predicates, generate_table, workload_preset

__version__ = "0.1.0"

__all__ = [
    "CodecId",
    "ColumnStats", "ColumnVector", "LogicalType", "SkewCategory", "Table", "compute_ndv", "compute_ndv_ratio",
    "compute_null_ratio", "compute_sortedness", "compute_stats", "fit_zipf_s",
    "BadMagic", "DecodeError", "EmptyColumn", "EncodingOverflow", "IndexOutOfRange", "InvalidConfig",
    "InvalidLevels", "InvalidProjection", "NotEnoughValues", "PaxError", "SchemaMismatch", "TruncatedFile",
    "TypeMismatch", "UnsupportedVersion",
    "SplitBlockBloomFilter", "ZoneMap", "zone_prune",
    "FileLayoutConfig", "FormatPreset", "PaxReader", "read_footer", "scan_table", "write_table",
    "PredicateOp", "PredicateSpec",
    "ScanStats", "SelectionBitvector", "Strategy", "StrategyConfig", "choose_strategy", "project_with_bitvector",
    "query", "select",
    "ColumnConfig", "WorkloadSpec", "generate_column", "generate_predicates", "generate_table", "workload_preset",
]
