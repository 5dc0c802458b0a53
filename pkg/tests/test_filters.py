import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from paxlab.column import ColumnVector, LogicalType
from paxlab.errors import InvalidConfig, TypeMismatch
from paxlab.filters import (
    SALT, PruneDecision, SplitBlockBloomFilter, ZoneMap, build_bloom, hash_value, hash_values, sbbf_insert,
    sbbf_query, sbbf_size_for, splitmix64, zone_prune,
)
from paxlab.predicates import PredicateSpec, evaluate

MASK64 = (1 << 64) - 1


def ref_splitmix64(x: int) -> int:
    x = (x + 0x9E3779B97F4A7C15) & MASK64
    x = ((x ^ (x >> 30)) * 0xBF58476D1CE4E5B9) & MASK64
    x = ((x ^ (x >> 27)) * 0x94D049BB133111EB) & MASK64
    return x ^ (x >> 31)


def ref_bits(h: int, num_blocks: int) -> list:
    """(word index, bit) pairs set for ``h``, written out scalar-by-scalar."""
    block = ((h >> 32) * num_blocks) >> 32
    low = h & 0xFFFFFFFF
    return [(block * 8 + i, ((low * int(SALT[i])) & 0xFFFFFFFF) >> 27) for i in range(8)]


def measured_fpp(fpp: float, n: int = 1_000_000, seed: int = 0) -> float:
    rng = np.random.default_rng(seed)
    keys = rng.integers(0, 2**63, 2 * n, dtype=np.int64)
    bloom = SplitBlockBloomFilter.for_keys(n, fpp)
    bloom.insert_many(hash_values(keys[:n], LogicalType.Int64))
    return float(bloom.query_many(hash_values(keys[n:], LogicalType.Int64)).mean())


class TestHashing:
    @given(st.integers(0, MASK64))
    def test_splitmix_matches_scalar(self, x):
        assert int(splitmix64(np.array([x], dtype=np.uint64))[0]) == ref_splitmix64(x)

    def test_negative_zero_folds(self):
        assert hash_value(-0.0, LogicalType.Float64) == hash_value(0.0, LogicalType.Float64)

    def test_int_hash_of_bits(self):
        assert hash_value(-1, LogicalType.Int64) == ref_splitmix64(MASK64)

    def test_strings_deterministic(self):
        a = hash_values(np.array(["x", "héllo", ""], dtype=object), LogicalType.Utf8String)
        b = hash_values(np.array(["x", "héllo", ""], dtype=object), LogicalType.Utf8String)
        assert a.tolist() == b.tolist() and len(set(a.tolist())) == 3


class TestSizing:
    def test_single_key_one_block(self):
        assert sbbf_size_for(1, 0.05) == 1

    def test_bits_for_million_keys(self):
        # inversion of the 8-salted-bit FPP: bits = -8n / ln(1 - fpp^(1/8))
        expected_bits = -8 * 1e6 / math.log(1 - 0.05 ** 0.125)
        assert sbbf_size_for(10**6, 0.05) == math.ceil(expected_bits / 256)
        assert expected_bits == pytest.approx(6.87e6, rel=0.01)

    @given(st.integers(1, 10**7), st.floats(0.001, 0.25))
    def test_halving_fpp_never_shrinks(self, n, fpp):
        assert sbbf_size_for(n, fpp / 2) >= sbbf_size_for(n, fpp)

    @pytest.mark.parametrize("n,fpp", [(0, 0.1), (10, 0.0), (10, 0.6)])
    def test_bad_arguments(self, n, fpp):
        with pytest.raises(InvalidConfig):
            sbbf_size_for(n, fpp)


class TestBloom:
    def test_insert_then_query(self):
        bloom = SplitBlockBloomFilter(4)
        sbbf_insert(bloom, 12345)
        assert sbbf_query(bloom, 12345)

    def test_empty_filter(self):
        bloom = SplitBlockBloomFilter(16)
        assert not any(sbbf_query(bloom, h) for h in range(0, 2**64, 2**58))

    @given(st.integers(0, MASK64), st.integers(1, 300))
    def test_bit_positions_match_reference(self, h, num_blocks):
        bloom = SplitBlockBloomFilter(num_blocks)
        bloom.insert(h)
        expected = np.zeros(num_blocks * 8, dtype=np.uint32)
        for word, bit in ref_bits(h, num_blocks):
            expected[word] |= np.uint32(1 << bit)
        assert bloom.words.tolist() == expected.tolist()

    @given(st.lists(st.integers(-2**63, 2**63 - 1), min_size=1, max_size=500), st.sampled_from([0.3, 0.05, 0.01]))
    def test_no_false_negatives(self, keys, fpp):
        col = ColumnVector.dense(LogicalType.Int64, keys)
        bloom = build_bloom(col, fpp)
        assert bloom.query_many(hash_values(keys, LogicalType.Int64)).all()

    def test_serialization(self):
        bloom = build_bloom(ColumnVector.dense(LogicalType.Utf8String, ["a", "b"]), 0.01)
        assert SplitBlockBloomFilter.from_bytes(bloom.to_bytes()) == bloom
        assert len(bloom.to_bytes()) == bloom.nbytes

    def test_monte_carlo_at_005(self):
        assert 0.025 <= measured_fpp(0.05) <= 0.10

    @pytest.mark.parametrize("fpp", [0.3, 0.01])
    def test_fpp_band(self, fpp):
        assert 0.5 * fpp <= measured_fpp(fpp, seed=1) <= 2 * fpp


class TestZonePrune:
    def zone(self, lo, hi, rows=10, nulls=0):
        return ZoneMap(LogicalType.Int64, rows, nulls, lo, hi)

    def test_disjoint_range(self):
        assert zone_prune(self.zone(30, 40), PredicateSpec.between("c", 10, 20)) is PruneDecision.Skip

    def test_overlapping_range(self):
        assert zone_prune(self.zone(30, 40), PredicateSpec.between("c", 10, 35)) is PruneDecision.Inspect

    def test_all_null_zone(self):
        zone = ZoneMap(LogicalType.Int64, 10, 10)
        assert zone_prune(zone, PredicateSpec.eq("c", 5)) is PruneDecision.Skip

    def test_boundary_inclusive(self):
        assert zone_prune(self.zone(30, 40), PredicateSpec.eq("c", 40)) is PruneDecision.Inspect

    def test_type_mismatch(self):
        with pytest.raises(TypeMismatch):
            zone_prune(self.zone(1, 2), PredicateSpec.eq("c", "x"))

    def test_invariants(self):
        with pytest.raises(InvalidConfig):
            self.zone(5, 1)
        with pytest.raises(InvalidConfig):
            self.zone(1, 5, rows=2, nulls=3)

    def test_merge(self):
        merged = ZoneMap.merge([self.zone(3, 9), ZoneMap(LogicalType.Int64, 4, 4), self.zone(-1, 2, nulls=1)])
        assert (merged.min, merged.max, merged.row_count, merged.null_count) == (-1, 9, 24, 5)

    def test_float_zone_ignores_nan(self):
        zone = ZoneMap.of(ColumnVector.dense(LogicalType.Float64, [np.nan, 2.0, -1.0]))
        assert (zone.min, zone.max) == (-1.0, 2.0)

    @given(st.lists(st.one_of(st.none(), st.integers(-100, 100)), min_size=1, max_size=80),
           st.integers(-120, 120), st.integers(0, 60))
    def test_soundness(self, values, lo, width):
        col = ColumnVector.from_values(LogicalType.Int64, values)
        pred = PredicateSpec.between("c", lo, lo + width)
        if zone_prune(ZoneMap.of(col), pred) is PruneDecision.Skip:
            assert not evaluate(pred, col).any()

    @given(st.lists(st.one_of(st.none(), st.text(max_size=3)), min_size=1, max_size=40), st.text(max_size=3))
    def test_string_soundness(self, values, key):
        col = ColumnVector.from_values(LogicalType.Utf8String, values)
        pred = PredicateSpec.eq("c", key)
        if zone_prune(ZoneMap.of(col), pred) is PruneDecision.Skip:
            assert not evaluate(pred, col).any()
