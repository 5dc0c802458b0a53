"""Experiment sweeps behind ``paxlab bench``.

Each suite returns a list of :class:`BenchRecord`.  Counters are exact and
reproducible from the seed; times are medians over ``reps`` runs.
"""

from __future__ import annotations

import dataclasses
import statistics
import time
from dataclasses import dataclass

import numpy as np

from ..codecs import CodecId
from ..column import ColumnVector, LogicalType, Table
from ..errors import InvalidConfig
from ..nested import (
    NestedModel, assemble_dremel, assemble_length_presence, decode_dremel, decode_length_presence, encode_dremel,
    encode_length_presence, recursive_records, recursive_schema, shred_dremel, shred_length_presence,
)
from ..paxfile import FileLayoutConfig, FormatPreset, PaxReader, ZoneLevel, parse_footer_sequential, read_column_meta
from ..paxfile import row_group_bounds, write_table_bytes
from ..predicates import PredicateSpec
from ..scan import select
from ..workload import ColumnConfig, Magnitude, ValueRangeSpec, generate_column, generate_table, workload_preset

SUITES = ("encode-sweep", "scan", "select", "bloom", "projection", "nested")

DEFAULT_ROWS = {
    "encode-sweep": 1_000_000,
    "scan": 1_000_000,
    "select": 10_000_000,
    "bloom": 10_000_000,
    "projection": 1_000,
    "nested": 20_000,
}

NDV_GRID = (1e-4, 1e-3, 1e-2, 0.1, 1.0)
ZIPF_GRID = (0.0, 0.5, 0.8, 1.0, 1.2, 1.4, 1.6, 2.0, 3.0)
SORTEDNESS_GRID = (0.0, 0.25, 0.5, 0.75, 0.9, 1.0)
RANGE_GRID = tuple(Magnitude)
SELECTIVITY_GRID = (1.0, 1e-1, 1e-2, 1e-3, 1e-4, 1e-5, 1e-6, 1e-7)
FPP_GRID = (0.3, 0.05, 0.01)
WIDTH_GRID = (10, 100, 1000, 4000)
DEPTH_GRID = tuple(range(1, 9))
PROJECTED = 10
SWEEP_TYPES = (LogicalType.Int64, LogicalType.Float64, LogicalType.Utf8String)
BLOOM_VALUE_MAX = 400_000


@dataclass
class BenchRecord:
    workload: str
    sweep_param: str
    param_value: str
    preset: str
    codec: str
    file_bytes: int = 0
    write_ns: int = 0
    scan_ns: int = 0
    select_ns: int = 0
    selectivity: float = 0.0
    zones_skipped: int = 0
    pages_decoded: int = 0
    bytes_read: int = 0
    read_ops: int = 0
    seed: int = 0

    @classmethod
    def fieldnames(cls) -> list:
        return [f.name for f in dataclasses.fields(cls)]

    def as_row(self) -> dict:
        return dataclasses.asdict(self)


@dataclass(frozen=True)
class BenchOptions:
    presets: tuple = (FormatPreset.ParquetLike, FormatPreset.OrcLike)
    codecs: tuple = (CodecId.None_,)
    seed: int = 0
    rows: int | None = None
    reps: int = 3
    overrides: dict | None = None

    def __post_init__(self):
        if self.reps < 3:
            raise InvalidConfig("timings need at least 3 repetitions")
        if self.rows is not None and self.rows < 1:
            raise InvalidConfig("rows must be positive")

    def rows_for(self, suite: str) -> int:
        return self.rows if self.rows is not None else DEFAULT_ROWS[suite]

    def layout(self, preset: FormatPreset, codec: CodecId) -> FileLayoutConfig:
        cfg = preset.config(codec)
        return cfg.with_overrides(self.overrides) if self.overrides else cfg


def median_ns(fn, reps: int):
    """Median wall time of ``fn`` over ``reps`` calls, plus the last result."""
    times, out = [], None
    for _ in range(reps):
        t = time.perf_counter_ns()
        out = fn()
        times.append(time.perf_counter_ns() - t)
    return int(statistics.median(times)), out


class ScanBuffer:
    """Preallocated destination arrays that every timed scan writes into."""

    def __init__(self, table: Table):
        self.values = {name: np.empty_like(col.values) for name, col in table.columns}
        self.validity = {name: np.empty_like(col.validity) for name, col in table.columns}

    def fill(self, table: Table) -> None:
        for name, col in table.columns:
            np.copyto(self.values[name], col.values)
            np.copyto(self.validity[name], col.validity)


def scan_into(data: bytes, buffer: ScanBuffer, projection=None) -> PaxReader:
    reader = PaxReader(data)
    buffer.fill(reader.scan(projection))
    return reader


def measure_write_scan(table: Table, cfg: FileLayoutConfig, reps: int) -> dict:
    write_ns, (data, _) = median_ns(lambda: write_table_bytes(table, cfg), reps)
    buffer = ScanBuffer(table)
    scan_ns, reader = median_ns(lambda: scan_into(data, buffer), reps)
    return {"data": data, "file_bytes": len(data), "write_ns": write_ns, "scan_ns": scan_ns,
            "bytes_read": reader.counters.bytes_read, "read_ops": reader.counters.read_ops}


# ---------------------------------------------------------------------------
# encode-sweep


def sweep_base_config(lt: LogicalType, rows: int, seed: int) -> ColumnConfig:
    """Baseline single-column config that each sweep axis varies: the core
    workload's property levels."""
    core = workload_preset("core")
    return ColumnConfig(lt, rows, ndv_ratio=max(core.ndv_ratio, 1 / rows), null_ratio=core.null_ratio,
                        value_range=ValueRangeSpec(core.value_range), sortedness_target=core.sortedness,
                        zipf_s=core.zipf_s, seed=seed)


def sweep_configs(lt: LogicalType, axis: str, rows: int, seed: int) -> list:
    """``[(param_value, ColumnConfig)]`` along one axis."""
    base = sweep_base_config(lt, rows, seed)
    if axis == "ndv_ratio":
        present = 1.0 - base.null_ratio
        return [(v, dataclasses.replace(base, ndv_ratio=max(min(v, present), 1 / rows))) for v in NDV_GRID]
    if axis == "zipf_s":
        return [(v, dataclasses.replace(base, zipf_s=v)) for v in ZIPF_GRID]
    if axis == "sortedness":
        return [(v, dataclasses.replace(base, sortedness_target=v)) for v in SORTEDNESS_GRID]
    if axis == "value_range":
        # few enough distinct values that even the small class holds them
        ndv = min(0.001, 1000 / rows) if rows >= 1000 else 1.0
        return [(m.value, dataclasses.replace(base, ndv_ratio=max(ndv, 1 / rows), value_range=ValueRangeSpec(m)))
                for m in RANGE_GRID]
    raise InvalidConfig(f"unknown sweep axis {axis!r}")


SWEEP_AXES = ("ndv_ratio", "zipf_s", "sortedness", "value_range")


def single_column_table(cfg: ColumnConfig) -> Table:
    return Table([("c0", generate_column(cfg))])


def run_encode_sweep(opts: BenchOptions, types=SWEEP_TYPES, axes=SWEEP_AXES) -> list:
    rows = opts.rows_for("encode-sweep")
    out = []
    for lt in types:
        for axis in axes:
            for value, ccfg in sweep_configs(lt, axis, rows, opts.seed):
                table = single_column_table(ccfg)
                for preset in opts.presets:
                    for codec in opts.codecs:
                        m = measure_write_scan(table, opts.layout(preset, codec), opts.reps)
                        out.append(BenchRecord(
                            f"encode:{lt.name}", axis, str(value), preset.value, codec.label,
                            file_bytes=m["file_bytes"], write_ns=m["write_ns"], scan_ns=m["scan_ns"],
                            selectivity=1.0, bytes_read=m["bytes_read"], read_ops=m["read_ops"], seed=opts.seed))
    return out


# ---------------------------------------------------------------------------
# scan (block compression on/off over a composite workload)


def run_scan(opts: BenchOptions, workload: str = "core", cols: int = 20) -> list:
    rows = opts.rows_for("scan")
    table = generate_table(workload_preset(workload), rows, cols, opts.seed)
    out = []
    for preset in opts.presets:
        for codec in opts.codecs:
            m = measure_write_scan(table, opts.layout(preset, codec), opts.reps)
            out.append(BenchRecord(workload, "codec", codec.label, preset.value, codec.label,
                                   file_bytes=m["file_bytes"], write_ns=m["write_ns"], scan_ns=m["scan_ns"],
                                   selectivity=1.0, bytes_read=m["bytes_read"], read_ops=m["read_ops"],
                                   seed=opts.seed))
    return out


# ---------------------------------------------------------------------------
# select (zone-map pruning across selectivities)


def clustered_floats(rows: int, seed: int) -> np.ndarray:
    """Strictly increasing floats: a perfectly clustered column."""
    rng = np.random.default_rng(seed)
    return np.cumsum(rng.integers(1, 100, rows)).astype(np.float64) / 100


def window_predicate(column: str, values: np.ndarray, selectivity: float, seed: int) -> PredicateSpec:
    """Range over a sorted, distinct ``values`` matching ``max(1, round(sel * n))`` rows."""
    n = len(values)
    k = min(n, max(1, int(round(selectivity * n))))
    start = int(np.random.default_rng(seed).integers(0, n - k + 1))
    return PredicateSpec.between(column, float(values[start]), float(values[start + k - 1]),
                                 target_selectivity=selectivity)


PRUNING_MODES = {
    "page": frozenset(ZoneLevel),
    "rowgroup": frozenset({ZoneLevel.File, ZoneLevel.RowGroup}),
}


def run_select(opts: BenchOptions, selectivities=SELECTIVITY_GRID) -> list:
    rows = opts.rows_for("select")
    values = clustered_floats(rows, opts.seed)
    table = Table([("x", ColumnVector.dense(LogicalType.Float64, values))])
    out = []
    for preset in opts.presets:
        for codec in opts.codecs:
            data, _ = write_table_bytes(table, opts.layout(preset, codec))
            for sel in selectivities:
                pred = window_predicate("x", values, sel, opts.seed)
                for mode, levels in PRUNING_MODES.items():
                    ns, bv = median_ns(lambda: select(data, pred, zone_levels=levels, use_bloom=False), opts.reps)
                    st = bv.stats
                    out.append(BenchRecord(
                        f"clustered-float:{mode}", "selectivity", repr(sel), preset.value, codec.label,
                        file_bytes=len(data), select_ns=ns, selectivity=bv.selectivity,
                        zones_skipped=st.zones_skipped, pages_decoded=st.pages_decoded,
                        bytes_read=st.bytes_read, read_ops=st.read_ops, seed=opts.seed))
    return out


# ---------------------------------------------------------------------------
# bloom (point queries across false-positive rates)


def uniform_ints(rows: int, seed: int, hi: int = BLOOM_VALUE_MAX) -> np.ndarray:
    return np.random.default_rng(seed).integers(1, hi + 1, rows)


def rare_key_in_every_group(values: np.ndarray, bounds: list, max_matches: int = 30) -> int:
    """A value matching at most ``max_matches`` rows yet present in every row
    group, taken from the middle of the domain so zone maps cannot prune it."""
    uniq, counts = np.unique(values, return_counts=True)
    candidates = uniq[counts <= max_matches]
    for start, stop in bounds:
        candidates = np.intersect1d(candidates, values[start:stop], assume_unique=False)
        if len(candidates) == 0:
            raise InvalidConfig("no rare key occurs in every row group")
    mid = (int(values.min()) + int(values.max())) / 2
    return int(candidates[np.argmin(np.abs(candidates - mid))])


def run_bloom(opts: BenchOptions, fpps=FPP_GRID) -> list:
    rows = opts.rows_for("bloom")
    values = uniform_ints(rows, opts.seed)
    table = Table([("k", ColumnVector.dense(LogicalType.Int64, values))])
    out = []
    for preset in opts.presets:
        for codec in opts.codecs:
            base = opts.layout(preset, codec)
            key = rare_key_in_every_group(values, row_group_bounds(table, base))
            pred = PredicateSpec.eq("k", key)
            for fpp in fpps:
                cfg = base.with_overrides({"bloom": {"enabled": True, "fpp": fpp}})
                data, _ = write_table_bytes(table, cfg)
                ns, bv = median_ns(lambda: select(data, pred), opts.reps)
                st = bv.stats
                out.append(BenchRecord(
                    f"uniform-int:{cfg.bloom.granularity.name}", "fpp", repr(fpp), preset.value, codec.label,
                    file_bytes=len(data), select_ns=ns, selectivity=bv.selectivity,
                    zones_skipped=st.zones_skipped, pages_decoded=st.pages_decoded,
                    bytes_read=st.bytes_read, read_ops=st.read_ops, seed=opts.seed))
    return out


# ---------------------------------------------------------------------------
# projection (footer cost as the table widens)


def wide_table(rows: int, cols: int, seed: int) -> Table:
    rng = np.random.default_rng(seed)
    block = rng.integers(0, 1000, size=(cols, rows))
    return Table([(f"c{i}", ColumnVector.dense(LogicalType.Int64, block[i])) for i in range(cols)])


def projected_names(cols: int, count: int = PROJECTED) -> list:
    return [f"c{i}" for i in np.linspace(0, cols - 1, min(count, cols)).astype(int)]


def resolve_projection_metadata(data: bytes, names: list) -> list:
    """Open a file and fetch chunk metadata for ``names`` via slot lookups."""
    reader = PaxReader(data)
    footer = reader.footer
    cols = [footer.column_index(n) for n in names]
    return [read_column_meta(footer, rg, c) for rg in range(footer.num_row_groups) for c in cols]


def resolve_projection_sequential(data: bytes, names: list) -> list:
    """Baseline: decode the entire footer before picking the projection."""
    reader = PaxReader(data)
    footer = reader.footer
    everything = parse_footer_sequential(footer)
    lookup = {footer.column_name(i): i for i in range(footer.num_columns)}
    cols = [lookup[n] for n in names]
    return [everything[rg][c] for rg in range(footer.num_row_groups) for c in cols]


def run_projection(opts: BenchOptions, widths=WIDTH_GRID) -> list:
    rows = opts.rows_for("projection")
    out = []
    for width in widths:
        table = wide_table(rows, width, opts.seed)
        names = projected_names(width)
        for preset in opts.presets:
            for codec in opts.codecs:
                data, _ = write_table_bytes(table, opts.layout(preset, codec))
                lookup_ns, _ = median_ns(lambda: resolve_projection_metadata(data, names), opts.reps)
                seq_ns, _ = median_ns(lambda: resolve_projection_sequential(data, names), opts.reps)
                buffer = ScanBuffer(table.select(names))
                scan_ns, reader = median_ns(lambda: scan_into(data, buffer, names), opts.reps)
                common = dict(file_bytes=len(data), seed=opts.seed, selectivity=1.0)
                out.append(BenchRecord("projection-meta", "width", str(width), preset.value, codec.label,
                                       scan_ns=lookup_ns, read_ops=3, **common))
                out.append(BenchRecord("projection-meta-sequential", "width", str(width), preset.value,
                                       codec.label, scan_ns=seq_ns, read_ops=3, **common))
                out.append(BenchRecord("projection-scan", "width", str(width), preset.value, codec.label,
                                       scan_ns=scan_ns, bytes_read=reader.counters.bytes_read,
                                       read_ops=reader.counters.read_ops, **common))
    return out


# ---------------------------------------------------------------------------
# nested (shredding model versus depth)


def nested_sizes(depth: int, records: int, seed: int) -> dict:
    schema = recursive_schema(depth)
    recs = recursive_records(depth, records, seed)
    return {
        NestedModel.Dremel: len(encode_dremel(shred_dremel(recs, schema))),
        NestedModel.LengthPresence: len(encode_length_presence(shred_length_presence(recs, schema))),
    }


def run_nested(opts: BenchOptions, depths=DEPTH_GRID) -> list:
    records = opts.rows_for("nested")
    out = []
    for depth in depths:
        schema = recursive_schema(depth)
        recs = recursive_records(depth, records, opts.seed)
        models = (
            (NestedModel.Dremel, shred_dremel, encode_dremel, decode_dremel, assemble_dremel),
            (NestedModel.LengthPresence, shred_length_presence, encode_length_presence,
             decode_length_presence, assemble_length_presence),
        )
        for model, shred, encode, decode, assemble in models:
            write_ns, blob = median_ns(lambda: encode(shred(recs, schema)), opts.reps)
            scan_ns, _ = median_ns(lambda: assemble(decode(blob, schema)), opts.reps)
            out.append(BenchRecord("recursive", "depth", str(depth), model.value, "none",
                                   file_bytes=len(blob), write_ns=write_ns, scan_ns=scan_ns,
                                   selectivity=1.0, seed=opts.seed))
    return out


RUNNERS = {
    "encode-sweep": run_encode_sweep,
    "scan": run_scan,
    "select": run_select,
    "bloom": run_bloom,
    "projection": run_projection,
    "nested": run_nested,
}


def run_suite(name: str, opts: BenchOptions) -> list:
    if name not in RUNNERS:
        raise InvalidConfig(f"unknown suite {name!r}; choose from {list(SUITES)}")
    return RUNNERS[name](opts)
