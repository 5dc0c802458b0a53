import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from conftest import make_table
from paxlab.codecs import CodecId
from paxlab.column import ColumnVector, LogicalType, Table
from paxlab.errors import IndexOutOfRange, InvalidConfig, TypeMismatch
from paxlab.paxfile import (
    BloomConfig, BloomGranularity, FormatPreset, PaxReader, RowGroupMode, ZoneLevel, scan_table, write_table_bytes,
)
from paxlab.predicates import PredicateSpec
from paxlab.scan import (
    SelectionBitvector, Strategy, StrategyConfig, brute_force_select, choose_strategy, project_with_bitvector, query,
    select,
)

PAGE = 1000


def layout(preset=FormatPreset.ParquetLike, codec=CodecId.None_, **changes):
    cfg = preset.config(codec).replace(page_rows=PAGE, row_group_mode=RowGroupMode.fixed_rows(5 * PAGE))
    return cfg.replace(**changes)


@pytest.fixture(scope="module")
def sorted_file():
    values = np.arange(20_000, dtype=np.int64)
    table = Table([("k", ColumnVector.dense(LogicalType.Int64, values)),
                   ("v", ColumnVector.dense(LogicalType.Float64, values / 4))])
    return table, write_table_bytes(table, layout())[0]


def brute_filter(table, pred, projection):
    return table.select(projection).take(np.flatnonzero(brute_force_select(table, pred)))


class TestSelect:
    def test_no_match_decodes_nothing(self, sorted_file):
        _, data = sorted_file
        bv = select(data, PredicateSpec.between("k", 50_000, 60_000))
        assert bv.popcount == 0 and bv.stats.pages_decoded == 0

    def test_matches_brute_force(self, sorted_file):
        table, data = sorted_file
        pred = PredicateSpec.between("k", 1234, 5678)
        assert select(data, pred) == brute_force_select(table, pred)

    def test_sorted_page_bound(self, sorted_file):
        _, data = sorted_file
        bv = select(data, PredicateSpec.between("k", 4500, 7600))
        assert bv.stats.pages_decoded <= math.ceil(bv.popcount / PAGE) + 2

    def test_page_level_never_worse(self, sorted_file):
        _, data = sorted_file
        pred = PredicateSpec.between("k", 4500, 4600)
        page = select(data, pred).stats.pages_decoded
        group = select(data, pred, zone_levels={ZoneLevel.File, ZoneLevel.RowGroup}).stats.pages_decoded
        assert page < group

    def test_type_mismatch(self, sorted_file):
        with pytest.raises(TypeMismatch):
            select(sorted_file[1], PredicateSpec.eq("k", "seven"))

    def test_nulls_never_match(self):
        table = Table([("x", ColumnVector.from_values(LogicalType.Int64, [None, 0, None, 0]))])
        data = write_table_bytes(table, FormatPreset.OrcLike.config())[0]
        assert select(data, PredicateSpec.eq("x", 0)).bits.tolist() == [False, True, False, True]

    def test_bloom_granularity(self):
        rng = np.random.default_rng(0)
        values = rng.integers(1, 400_000, 100_000)
        key = 200_000
        values[values == key] += 1
        # the key sits inside every zone's range, so only the filter can skip pages
        values[::7919] = key
        table = Table([("u", ColumnVector.dense(LogicalType.Int64, values))])
        pred = PredicateSpec.eq("u", key)
        decoded = {}
        for gran in BloomGranularity:
            cfg = layout(bloom=BloomConfig(True, 0.01, gran), row_group_mode=RowGroupMode.fixed_rows(50_000))
            bv = select(write_table_bytes(table, cfg)[0], pred)
            assert bv == brute_force_select(table, pred)
            decoded[gran] = bv.stats.pages_decoded
        assert decoded[BloomGranularity.Page] < decoded[BloomGranularity.ColumnChunk]

    @settings(max_examples=25)
    @given(st.integers(0, 3), st.sampled_from(list(FormatPreset)), st.sampled_from(list(CodecId)),
           st.sampled_from(["i", "f", "s", "b"]), st.integers(0, 10**6))
    def test_soundness(self, seed, preset, codec, column, draw):
        table = make_table(3000, seed=seed)
        data = write_table_bytes(table, layout(preset, codec, page_rows=300,
                                               row_group_mode=RowGroupMode.fixed_rows(1200)))[0]
        col = table.column(column)
        present = col.present()
        rng = np.random.default_rng(draw)
        a, b = sorted(present[rng.integers(0, len(present), 2)].tolist())
        pred = PredicateSpec.eq(column, a) if draw % 2 else PredicateSpec.between(column, a, b)
        assert select(data, pred) == brute_force_select(table, pred)


class TestProject:
    def test_all_ones(self, mixed_table):
        data = write_table_bytes(mixed_table, layout())[0]
        out = project_with_bitvector(data, SelectionBitvector.ones(len(mixed_table.column("i"))), ["i", "s"])
        assert out == scan_table(data, ["i", "s"])

    def test_all_zeros_reads_no_data(self, mixed_table):
        data = write_table_bytes(mixed_table, layout())[0]
        with PaxReader(data) as reader:
            bv = SelectionBitvector.zeros(reader.row_count)
            before = reader.counters.snapshot()
            out = project_with_bitvector(reader, bv, ["i", "f"])
            assert reader.counters.bytes_read == before.bytes_read
        assert out.row_count == 0 and out.names == ["i", "f"]

    def test_one_page_per_column(self, sorted_file):
        _, data = sorted_file
        bits = np.zeros(20_000, dtype=bool)
        bits[[3100, 3500, 3999]] = True
        with PaxReader(data) as reader:
            bv = SelectionBitvector(bits)
            project_with_bitvector(reader, bv, ["k", "v"], bv.stats)
        assert bv.stats.pages_decoded == 2

    def test_length_checked(self, sorted_file):
        with pytest.raises(IndexOutOfRange):
            project_with_bitvector(sorted_file[1], SelectionBitvector.zeros(5), ["k"])

    @pytest.mark.parametrize("preset", list(FormatPreset), ids=lambda p: p.value)
    @pytest.mark.parametrize("codec", list(CodecId), ids=lambda c: c.label)
    def test_end_to_end(self, preset, codec):
        table = make_table(12_000, seed=4)
        data = write_table_bytes(table, layout(preset, codec))[0]
        for pred in (PredicateSpec.between("i", -20, 40), PredicateSpec.eq("s", "w7"),
                     PredicateSpec.between("f", 10.0, 10.5), PredicateSpec.eq("b", True)):
            bv = select(data, pred)
            got = project_with_bitvector(data, bv, ["i", "f", "s", "b"])
            assert got == brute_filter(table, pred, ["i", "f", "s", "b"])


class TestStrategy:
    def test_tiny_selectivity(self):
        assert choose_strategy(1e-5) is Strategy.LateMaterialize

    def test_tenth(self):
        assert choose_strategy(0.1) is Strategy.FullScanThenFilter

    def test_tie_goes_to_late(self):
        assert choose_strategy(0.02) is Strategy.LateMaterialize
        assert choose_strategy(0.3, StrategyConfig(0.3)) is Strategy.LateMaterialize

    def test_bounds(self):
        with pytest.raises(InvalidConfig):
            choose_strategy(1.5)
        with pytest.raises(InvalidConfig):
            StrategyConfig(-0.1)

    @given(st.floats(0, 1), st.floats(0, 1))
    def test_threshold_rule(self, estimate, threshold):
        expected = Strategy.LateMaterialize if estimate <= threshold else Strategy.FullScanThenFilter
        assert choose_strategy(estimate, StrategyConfig(threshold)) is expected

    @pytest.mark.parametrize("hi,strategy", [(50, Strategy.LateMaterialize), (15_000, Strategy.FullScanThenFilter)])
    def test_query_picks_by_estimate(self, sorted_file, hi, strategy):
        # the estimate counts inspected rows, so one surviving page of 20 reads as 0.05
        table, data = sorted_file
        pred = PredicateSpec.between("k", 0, hi)
        got, chosen, stats = query(data, pred, ["v"], StrategyConfig(0.1))
        assert chosen is strategy
        assert got == brute_filter(table, pred, ["v"])
        assert stats.pages_decoded > 0
