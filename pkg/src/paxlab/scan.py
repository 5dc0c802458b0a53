"""Predicate selection with pruning, and late materialization."""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .column import ColumnVector, Table, concat_columns, dtype_for
from .errors import IndexOutOfRange, InvalidConfig
from .filters import PruneDecision, hash_value, zone_prune
from .paxfile.layout import BloomGranularity, ZoneLevel
from .paxfile.reader import IOCounters, open_reader
from .predicates import PredicateOp, PredicateSpec, check_predicate_type, evaluate


@dataclass
class ScanStats:
    zones_skipped: int = 0
    pages_decoded: int = 0
    bytes_read: int = 0
    read_ops: int = 0
    # rows in zones that survived pruning (the pre-decode selectivity signal)
    inspected_rows: int = 0

    def as_dict(self) -> dict:
        return {"zones_skipped": self.zones_skipped, "pages_decoded": self.pages_decoded,
                "bytes_read": self.bytes_read, "read_ops": self.read_ops}


@dataclass(eq=False)
class SelectionBitvector:
    bits: np.ndarray
    stats: ScanStats = field(default_factory=ScanStats)

    def __post_init__(self):
        self.bits = np.asarray(self.bits, dtype=np.bool_)
        self._popcount = int(np.count_nonzero(self.bits))

    def __len__(self) -> int:
        return len(self.bits)

    @property
    def popcount(self) -> int:
        return self._popcount

    @property
    def selectivity(self) -> float:
        return self._popcount / len(self.bits) if len(self.bits) else 0.0

    @property
    def selectivity_estimate(self) -> float:
        return self.stats.inspected_rows / len(self.bits) if len(self.bits) else 0.0

    @classmethod
    def ones(cls, n: int) -> "SelectionBitvector":
        return cls(np.ones(n, dtype=np.bool_))

    @classmethod
    def zeros(cls, n: int) -> "SelectionBitvector":
        return cls(np.zeros(n, dtype=np.bool_))

    def __eq__(self, other):
        if isinstance(other, SelectionBitvector):
            other = other.bits
        return np.array_equal(self.bits, np.asarray(other, dtype=np.bool_))


class _Accounting:
    """Attributes a reader's I/O counter deltas to one query."""

    def __init__(self, reader, owned: bool):
        self.reader = reader
        self.start = IOCounters() if owned else reader.counters.snapshot()

    def finish(self, stats: ScanStats) -> None:
        c = self.reader.counters
        stats.bytes_read += c.bytes_read - self.start.bytes_read
        stats.read_ops += c.read_ops - self.start.read_ops


def select(file, pred: PredicateSpec, *, zone_levels=None, use_bloom: bool = True) -> SelectionBitvector:
    """Evaluate ``pred`` over a file, decoding only pages pruning cannot rule out.

    ``zone_levels`` restricts which recorded zone-map levels are consulted
    (default: all recorded); ``use_bloom`` toggles Bloom probing for Eq.
    """
    reader = open_reader(file)
    owned = reader is not file
    acct = _Accounting(reader, owned)
    try:
        col = reader.column_index(pred.column_name)
        lt = reader.footer.column_type(col)
        check_predicate_type(pred, lt)
        recorded = reader.footer.layout.zone_levels
        levels = recorded if zone_levels is None else recorded & frozenset(zone_levels)
        stats = ScanStats()
        bits = np.zeros(reader.row_count, dtype=np.bool_)
        key = hash_value(pred.literals[0], lt) if pred.op is PredicateOp.Eq and use_bloom else None

        file_zone = reader.footer.file_zone_map(col) if ZoneLevel.File in levels else None
        if file_zone is not None and zone_prune(file_zone, pred) is PruneDecision.Skip:
            stats.zones_skipped += 1
        else:
            for rg in range(reader.num_row_groups):
                _select_group(reader, rg, col, pred, levels, key, bits, stats)
        acct.finish(stats)
        return SelectionBitvector(bits, stats)
    finally:
        if owned:
            reader.close()


def _select_group(reader, rg, col, pred, levels, key, bits, stats) -> None:
    meta = reader.meta(rg, col)
    first = reader.footer.row_groups[rg].first_row
    if ZoneLevel.RowGroup in levels and meta.zone is not None:
        if zone_prune(meta.zone, pred) is PruneDecision.Skip:
            stats.zones_skipped += 1
            return
    candidates = list(range(len(meta.pages)))
    if ZoneLevel.Page in levels:
        zones = reader.page_zone_maps(rg, col)
        if zones is not None:
            keep = [p for p in candidates if zone_prune(zones[p], pred) is PruneDecision.Inspect]
            stats.zones_skipped += len(candidates) - len(keep)
            candidates = keep
    if candidates and key is not None:
        blooms = reader.bloom_filters(rg, col)
        if blooms is not None:
            granularity, filters = blooms
            if granularity is BloomGranularity.Page:
                keep = [p for p in candidates if filters[p].query(key)]
            else:
                keep = candidates if filters[0].query(key) else []
            stats.zones_skipped += len(candidates) - len(keep)
            candidates = keep
    if not candidates:
        return
    starts = meta.page_row_starts()
    stats.inspected_rows += sum(meta.pages[p].row_count for p in candidates)
    vecs = reader.read_pages(rg, col, candidates)
    stats.pages_decoded += len(vecs)
    for p, vec in zip(candidates, vecs):
        a = first + starts[p]
        bits[a:a + len(vec)] = evaluate(pred, vec)


def project_with_bitvector(file, bv, projection, stats: ScanStats | None = None) -> Table:
    """Materialize the selected rows of ``projection``, reading only pages
    that hold at least one selected row."""
    reader = open_reader(file)
    owned = reader is not file
    acct = _Accounting(reader, owned)
    try:
        bits = bv.bits if isinstance(bv, SelectionBitvector) else np.asarray(bv, dtype=np.bool_)
        if len(bits) != reader.row_count:
            raise IndexOutOfRange(f"bitvector length {len(bits)} != file rows {reader.row_count}")
        cols = reader.resolve_projection(projection)
        local = ScanStats()
        out = []
        for c in cols:
            lt = reader.footer.column_type(c)
            parts = []
            for rg in range(reader.num_row_groups):
                meta = reader.meta(rg, c)
                first = reader.footer.row_groups[rg].first_row
                starts = meta.page_row_starts()
                lengths = [e.row_count for e in meta.pages]
                wanted = [p for p, (s, ln) in enumerate(zip(starts, lengths))
                          if bits[first + s:first + s + ln].any()]
                if not wanted:
                    continue
                vecs = reader.read_pages(rg, c, wanted)
                local.pages_decoded += len(vecs)
                for p, vec in zip(wanted, vecs):
                    a = first + starts[p]
                    parts.append(vec.take(np.flatnonzero(bits[a:a + len(vec)])))
            if parts:
                vec = concat_columns(parts, lt)
            else:
                vec = ColumnVector(lt, np.empty(0, dtype=dtype_for(lt)), np.empty(0, dtype=np.bool_))
            out.append((reader.footer.column_name(c), vec))
        acct.finish(local)
        if stats is not None:
            stats.pages_decoded += local.pages_decoded
            stats.bytes_read += local.bytes_read
            stats.read_ops += local.read_ops
        return Table(out)
    finally:
        if owned:
            reader.close()


def brute_force_select(table: Table, pred: PredicateSpec) -> np.ndarray:
    return evaluate(pred, table.column(pred.column_name))


class Strategy(enum.Enum):
    LateMaterialize = "late"
    FullScanThenFilter = "full"


@dataclass(frozen=True)
class StrategyConfig:
    threshold: float = 0.02

    def __post_init__(self):
        if not 0 <= self.threshold <= 1:
            raise InvalidConfig("strategy threshold must lie in [0, 1]")


def choose_strategy(selectivity_estimate: float, cfg: StrategyConfig | None = None) -> Strategy:
    """Late materialization at or below the threshold; ties favor skipping."""
    if not 0 <= selectivity_estimate <= 1:
        raise InvalidConfig(f"selectivity estimate {selectivity_estimate} outside [0, 1]")
    threshold = (cfg or StrategyConfig()).threshold
    return Strategy.LateMaterialize if selectivity_estimate <= threshold else Strategy.FullScanThenFilter


def query(file, pred: PredicateSpec, projection, cfg: StrategyConfig | None = None):
    """Select then materialize, picking the strategy from the pruning estimate.

    Returns ``(table, strategy, stats)``.
    """
    reader = open_reader(file)
    owned = reader is not file
    try:
        bv = select(reader, pred)
        strategy = choose_strategy(bv.selectivity_estimate, cfg)
        stats = bv.stats
        if strategy is Strategy.LateMaterialize:
            table = project_with_bitvector(reader, bv, projection, stats)
        else:
            acct = _Accounting(reader, False)
            full = reader.scan(projection)
            acct.finish(stats)
            stats.pages_decoded += sum(len(reader.meta(rg, reader.column_index(n)).pages)
                                       for n in full.names for rg in range(reader.num_row_groups))
            table = full.take(np.flatnonzero(bv.bits))
        return table, strategy, stats
    finally:
        if owned:
            reader.close()
