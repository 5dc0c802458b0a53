import dataclasses

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra import numpy as hnp

from paxlab.column import ColumnVector, LogicalType, dtype_for
from paxlab.encoders import (
    EncodedBlock, EncodingPolicy, Scheme, bitpack, bitunpack, byte_rle_decode, byte_rle_encode,
    decode_column_chunk, describe_runs, describe_subsequences, dict_decode, dict_encode, encode_column_chunk,
    orc_hybrid_decode, orc_hybrid_encode, plain_decode, plain_encode, presence_decode, presence_encode,
    rle_bp_hybrid_decode, rle_bp_hybrid_encode, zigzag_decode, zigzag_encode,
)
from paxlab.encoders.bitpack import bitpack_exact, bitunpack_exact, read_varint
from paxlab.encoders.chunk import DictEncoding, PlainFallback
from paxlab.errors import EncodingOverflow
from paxlab.workload import ColumnConfig, Magnitude, ValueRangeSpec, generate_column, generate_table, \
    workload_preset

I64 = np.iinfo(np.int64)
i64_arrays = hnp.arrays(np.int64, st.integers(0, 700), elements=st.integers(I64.min, I64.max))
small_runs = st.lists(st.tuples(st.integers(-40, 40), st.integers(1, 30)), max_size=60).map(
    lambda runs: np.array([v for v, n in runs for _ in range(n)], dtype=np.int64))


class TestBitpack:
    def test_eight_values_width_three(self):
        assert len(bitpack(np.arange(8), 3)) == 3

    def test_lsb_first_layout(self):
        # 1 at width 3 -> bits 001, 2 -> 010: byte0 = 0b00_010_001
        assert bitpack([1, 2], 3)[0] == 0b00010001

    def test_width_zero(self):
        assert bitpack(np.zeros(17, dtype=np.uint64), 0) == b""
        assert bitunpack(b"", 17, 0).tolist() == [0] * 17

    def test_overflow(self):
        with pytest.raises(EncodingOverflow):
            bitpack([8], 3)

    def test_partial_group_padded(self):
        assert len(bitpack(np.arange(9), 4)) == 8

    @given(hnp.arrays(np.uint64, st.integers(0, 300), elements=st.integers(0, 2**64 - 1)))
    def test_round_trip_at_max_width(self, values):
        width = int(values.max()).bit_length() if len(values) else 0
        assert bitunpack(bitpack(values, width), len(values), width).tolist() == values.tolist()

    @given(hnp.arrays(np.uint64, st.integers(0, 100), elements=st.integers(0, 2**13 - 1)))
    def test_exact_variant(self, values):
        payload = bitpack_exact(values, 13)
        assert len(payload) == -(-len(values) * 13 // 8)
        assert bitunpack_exact(payload, len(values), 13).tolist() == values.tolist()

    @given(i64_arrays)
    def test_zigzag_round_trip(self, values):
        assert (zigzag_decode(zigzag_encode(values)) == values).all()

    def test_zigzag_order(self):
        assert zigzag_encode(np.array([0, -1, 1, -2, 2])).tolist() == [0, 1, 2, 3, 4]


class TestRleBitpackHybrid:
    def test_eight_identical_is_one_rle_run(self):
        assert describe_runs(rle_bp_hybrid_encode([4] * 8)) == [("rle", 8)]

    def test_seven_identical_plus_one(self):
        assert describe_runs(rle_bp_hybrid_encode([4] * 7 + [1])) == [("bitpacked", 8)]

    def test_empty(self):
        block = rle_bp_hybrid_encode([])
        assert block.value_count == 0 and block.payload == b""
        assert len(rle_bp_hybrid_decode(block)) == 0

    def test_configurable_threshold(self):
        runs = describe_runs(rle_bp_hybrid_encode([1, 2, 3, 4, 5, 6, 7, 8] + [9] * 4, rle_min_run=4))
        assert ("rle", 4) in runs

    def test_header_golden(self):
        # width byte 3, header varint (8 << 1) = 0x10, value byte 4
        assert rle_bp_hybrid_encode([4] * 8).payload == bytes([3, 0x10, 4])

    def test_block_serialization(self):
        block = rle_bp_hybrid_encode(np.arange(100) % 7)
        parsed, end = EncodedBlock.from_bytes(block.to_bytes())
        assert parsed == block and end == len(block.to_bytes())

    @given(small_runs.map(np.abs), st.integers(1, 12))
    def test_round_trip_and_min_run(self, values, min_run):
        block = rle_bp_hybrid_encode(values, min_run)
        assert rle_bp_hybrid_decode(block).tolist() == values.tolist()
        assert all(n >= min_run for kind, n in describe_runs(block) if kind == "rle")


class TestOrcHybrid:
    def test_short_repeat(self):
        block = orc_hybrid_encode([7] * 5)
        assert describe_subsequences(block) == [("SHORT_REPEAT", 5, 8)]
        # tag 00 | bytes-1 = 0 | run-3 = 2, then zigzag(7) = 14
        assert block.payload == bytes([0x02, 0x0E])

    def test_monotonic_512_is_delta(self):
        block = orc_hybrid_encode(np.arange(10, 522))
        assert [t for t, _, _ in describe_subsequences(block)] == ["DELTA"]
        # tag 11 | width 2, length-1 = 511, base zigzag(10) = 20, deltas zigzag(1) = 0b10 each
        assert block.payload[:4] == bytes([0xC2, 0xFF, 0x01, 0x14])
        # 511 deltas fill 127 bytes; the last holds three deltas and two zero pad bits
        assert block.payload[4:] == b"\xaa" * 127 + b"\x2a"

    def test_long_identical_run_is_zero_delta(self):
        assert orc_hybrid_encode([3] * 20).payload == bytes([0xC0, 0x13, 0x00, 0x06])

    def test_outlier_is_patched_base(self):
        values = np.array([(i * 7) % 16 for i in range(511)] + [2**40])
        block = orc_hybrid_encode(values)
        assert describe_subsequences(block) == [("PATCHED_BASE", 512, 4)]
        # header (3) + base varint (1) + 512 values at 4 bits (256), then the patch count
        count, _ = read_varint(block.payload, 3 + 1 + 256)
        assert count == 1

    def test_random_bytes_are_direct(self):
        values = np.random.default_rng(0).permutation(256)
        assert {t for t, _, _ in describe_subsequences(orc_hybrid_encode(values))} == {"DIRECT"}

    def test_extremes(self):
        values = np.array([I64.min, I64.max, 0, -1, I64.min, I64.min, I64.min], dtype=np.int64)
        assert orc_hybrid_decode(orc_hybrid_encode(values)).tolist() == values.tolist()

    def test_empty(self):
        assert len(orc_hybrid_decode(orc_hybrid_encode([]))) == 0

    @given(st.one_of(i64_arrays, small_runs, small_runs.map(np.cumsum)))
    def test_round_trip_and_rule_bounds(self, values):
        block = orc_hybrid_encode(values)
        assert orc_hybrid_decode(block).tolist() == values.tolist()
        for tag, length, _ in describe_subsequences(block):
            if tag == "SHORT_REPEAT":
                assert 3 <= length <= 10
            else:
                assert length <= 512


class TestPresence:
    def test_all_present_million(self):
        assert len(presence_encode(np.ones(10**6, dtype=bool))) <= 16

    def test_empty(self):
        assert presence_encode(np.zeros(0, dtype=bool)) == b""

    def test_alternating(self):
        bits = np.arange(1001) % 2 == 0
        assert presence_decode(presence_encode(bits)).tolist() == bits.tolist()

    @given(hnp.arrays(np.bool_, st.integers(0, 2000)))
    def test_round_trip(self, bits):
        assert presence_decode(presence_encode(bits)).tolist() == bits.tolist()

    @given(st.binary(max_size=600))
    def test_byte_rle_round_trip(self, data):
        decoded, _ = byte_rle_decode(byte_rle_encode(data), len(data))
        assert bytes(decoded) == data


class TestDictionary:
    def test_float_first_appearance(self):
        col = ColumnVector.dense(LogicalType.Float64, [1.5, 1.5, 2.5])
        enc = dict_encode(col, EncodingPolicy.parquet_like())
        assert enc.dictionary.entries.tolist() == [1.5, 2.5]
        assert rle_bp_hybrid_decode(enc.codes).tolist() == [0, 0, 1]

    def test_first_appearance_not_sorted(self):
        col = ColumnVector.from_values(LogicalType.Utf8String, ["b", "a", None, "b", "c"])
        enc = dict_encode(col, EncodingPolicy.parquet_like())
        assert enc.dictionary.entries.tolist() == ["b", "a", "c"]

    def test_orc_high_ndv_strings_fall_back(self):
        col = ColumnVector.from_values(LogicalType.Utf8String, [f"s{i % 90}" for i in range(100)])
        assert isinstance(dict_encode(col, EncodingPolicy.orc_like()), PlainFallback)

    def test_orc_low_ndv_strings_use_dictionary(self):
        col = ColumnVector.from_values(LogicalType.Utf8String, [f"s{i % 10}" for i in range(100)])
        assert isinstance(dict_encode(col, EncodingPolicy.orc_like()), DictEncoding)

    def test_orc_integers_pass_through(self):
        col = ColumnVector.dense(LogicalType.Int64, [1, 1, 1, 2])
        assert isinstance(dict_encode(col, EncodingPolicy.orc_like()), PlainFallback)
        assert encode_column_chunk(col, EncodingPolicy.orc_like()).scheme is Scheme.OrcHybrid

    def test_overflow_spills_plain(self):
        values = np.arange(1000, dtype=np.int64) % 300
        col = ColumnVector.dense(LogicalType.Int64, values)
        policy = EncodingPolicy.parquet_like(dict_size_limit_bytes=800)
        enc = dict_encode(col, policy)
        assert enc.dictionary.overflowed and len(enc.dictionary) == 100
        assert enc.dictionary.byte_size <= 800
        assert dict_decode(enc, col.validity, LogicalType.Int64, policy) == col

    def test_codes_are_dense(self):
        col = generate_column(ColumnConfig(LogicalType.Utf8String, 5000, 0.02, 0.1, zipf_s=1.0, seed=3))
        enc = dict_encode(col, EncodingPolicy.parquet_like())
        assert rle_bp_hybrid_decode(enc.codes).max() == len(enc.dictionary) - 1

    @pytest.mark.parametrize("policy", [EncodingPolicy.parquet_like(), EncodingPolicy.orc_like()])
    def test_dict_round_trip(self, policy):
        col = generate_column(ColumnConfig(LogicalType.Utf8String, 3000, 0.05, 0.2, seed=8))
        assert dict_decode(dict_encode(col, policy), col.validity, col.logical_type, policy) == col


class TestPlain:
    @pytest.mark.parametrize("lt,values", [
        (LogicalType.Int64, np.array([I64.min, 0, I64.max])),
        (LogicalType.Float64, np.array([np.nan, -0.0, np.inf, 1e-300])),
        (LogicalType.Utf8String, np.array(["", "héllo", "x" * 300], dtype=object)),
        (LogicalType.Bool, np.array([True, False, True])),
    ])
    def test_round_trip(self, lt, values):
        decoded, _ = plain_decode(plain_encode(values, lt), len(values), lt)
        assert ColumnVector.dense(lt, decoded) == ColumnVector.dense(lt, values)


SAMPLE = {LogicalType.Int64: I64.min, LogicalType.Float64: -0.0, LogicalType.Utf8String: "z",
          LogicalType.Bool: True}
POLICIES = [EncodingPolicy.parquet_like(), EncodingPolicy.orc_like(), EncodingPolicy.plain_only()]


class TestColumnChunk:
    @pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.style.value)
    @pytest.mark.parametrize("workload", ["core", "bi", "classic", "geo", "log", "ml"])
    def test_workload_round_trip(self, policy, workload):
        table = generate_table(workload_preset(workload), 3000, 8, 1)
        for _, col in table.columns:
            chunk = encode_column_chunk(col, policy, page_rows=700)
            assert decode_column_chunk(chunk.to_bytes()) == col

    @pytest.mark.parametrize("policy", POLICIES, ids=lambda p: p.style.value)
    @pytest.mark.parametrize("lt", list(LogicalType))
    def test_all_null_and_single_value(self, policy, lt):
        nulls = ColumnVector(lt, np.zeros(50, dtype=dtype_for(lt)), np.zeros(50, dtype=bool))
        assert decode_column_chunk(encode_column_chunk(nulls, policy, page_rows=16).to_bytes()) == nulls
        one = ColumnVector.from_values(lt, [SAMPLE[lt]])
        assert decode_column_chunk(encode_column_chunk(one, policy).to_bytes()) == one

    def test_value_range_stable_for_parquet(self):
        sizes = {}
        for mag in (Magnitude.Small, Magnitude.Large):
            col = generate_column(ColumnConfig(LogicalType.Int64, 20_000, 0.01, value_range=ValueRangeSpec(mag),
                                               zipf_s=1.0, seed=5))
            sizes[mag] = (encode_column_chunk(col, EncodingPolicy.parquet_like()).nbytes - _dict_bytes(col),
                          encode_column_chunk(col, EncodingPolicy.orc_like()).nbytes)
        assert sizes[Magnitude.Small][0] == sizes[Magnitude.Large][0]
        assert sizes[Magnitude.Small][1] < sizes[Magnitude.Large][1]

    def test_orc_earlier_skew_benefit(self):
        from paxlab.bench.suites import sweep_base_config
        col = generate_column(dataclasses.replace(sweep_base_config(LogicalType.Int64, 100_000, 0), zipf_s=1.2))
        plain = encode_column_chunk(col, EncodingPolicy.plain_only()).nbytes
        orc = encode_column_chunk(col, EncodingPolicy.orc_like(), page_rows=10_000).nbytes
        parquet = encode_column_chunk(col, EncodingPolicy.parquet_like(), page_rows=131_072).nbytes
        assert orc / plain < parquet / plain

    def test_parquet_size_non_increasing_in_skew(self):
        from paxlab.bench.suites import sweep_base_config
        base = sweep_base_config(LogicalType.Int64, 100_000, 0)
        sizes = [encode_column_chunk(generate_column(dataclasses.replace(base, zipf_s=s)),
                                     EncodingPolicy.parquet_like()).nbytes for s in (0.0, 1.0, 2.0, 3.0)]
        assert sizes == sorted(sizes, reverse=True)


def _dict_bytes(col):
    chunk = encode_column_chunk(col, EncodingPolicy.parquet_like())
    return len(chunk.dictionary_page or b"")
