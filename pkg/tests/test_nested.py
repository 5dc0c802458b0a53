import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from paxlab.column import LogicalType
from paxlab.errors import InvalidConfig, InvalidLevels, SchemaMismatch
from paxlab.nested import (
    NestedModel, NestedSchema, NodeKind, Repetition, SchemaNode, assemble_dremel, assemble_length_presence,
    count_physical_columns, decode_dremel, decode_length_presence, encode_dremel, encode_length_presence,
    encoded_size, random_records, random_schema, recursive_records, recursive_schema, shred_dremel,
    shred_length_presence,
)

R, O, P = Repetition.Required, Repetition.Optional, Repetition.Repeated
I64, STR = LogicalType.Int64, LogicalType.Utf8String


def document_schema():
    """The classic web-document schema used to introduce repetition levels."""
    return NestedSchema(SchemaNode.struct("root", [
        SchemaNode.atomic("DocId", I64),
        SchemaNode.struct("Links", [SchemaNode.atomic("Backward", I64, P), SchemaNode.atomic("Forward", I64, P)], O),
        SchemaNode.struct("Name", [
            SchemaNode.struct("Language", [SchemaNode.atomic("Code", STR), SchemaNode.atomic("Country", STR, O)], P),
            SchemaNode.atomic("Url", STR, O),
        ], P),
    ]))


DOCUMENTS = [
    {"DocId": 10, "Links": {"Backward": [], "Forward": [20, 40, 60]},
     "Name": [{"Language": [{"Code": "en-us", "Country": "us"}, {"Code": "en", "Country": None}], "Url": "http://A"},
              {"Language": [], "Url": "http://B"},
              {"Language": [{"Code": "en-gb", "Country": "gb"}], "Url": None}]},
    {"DocId": 20, "Links": {"Backward": [10, 30], "Forward": [80]},
     "Name": [{"Language": [], "Url": "http://C"}]},
]

# (values, rep, def) per leaf, as published with the original record-shredding algorithm
DOCUMENT_LEVELS = {
    ("root", "DocId"): ([10, 20], [0, 0], [0, 0]),
    ("root", "Links", "Backward"): ([None, 10, 30], [0, 0, 1], [1, 2, 2]),
    ("root", "Links", "Forward"): ([20, 40, 60, 80], [0, 1, 1, 0], [2, 2, 2, 2]),
    ("root", "Name", "Language", "Code"): (["en-us", "en", None, "en-gb", None], [0, 2, 1, 1, 0], [2, 2, 1, 2, 1]),
    ("root", "Name", "Language", "Country"): (["us", None, None, "gb", None], [0, 2, 1, 1, 0], [3, 2, 1, 3, 1]),
    ("root", "Name", "Url"): (["http://A", "http://B", None, "http://C"], [0, 1, 1, 0], [2, 2, 1, 2]),
}


def flat_schema():
    return NestedSchema(SchemaNode.struct("root", [SchemaNode.atomic(c, I64) for c in "abc"]))


def optional_struct_schema():
    inner = SchemaNode.struct("s", [SchemaNode.atomic("x", I64), SchemaNode.atomic("y", STR)], O)
    return NestedSchema(SchemaNode.struct("root", [inner]))


def list_of_structs_schema():
    elem = SchemaNode.struct("element", [SchemaNode.atomic("v", I64)])
    return NestedSchema(SchemaNode.struct("root", [SchemaNode.list_of("items", elem)]))


def round_trips(records, schema):
    dremel = assemble_dremel(decode_dremel(encode_dremel(shred_dremel(records, schema)), schema), schema)
    lp = shred_length_presence(records, schema)
    length_presence = assemble_length_presence(decode_length_presence(encode_length_presence(lp), schema), schema)
    return dremel, length_presence


class TestSchema:
    def test_levels(self):
        schema = document_schema()
        assert schema.levels(("root", "Name", "Language", "Country")) == (3, 2)
        assert schema.levels(("root", "Links", "Backward")) == (2, 1)

    def test_root_must_be_required_struct(self):
        with pytest.raises(InvalidConfig):
            NestedSchema(SchemaNode.struct("root", [SchemaNode.atomic("a", I64)], O))

    def test_list_has_one_child(self):
        with pytest.raises(InvalidConfig):
            SchemaNode("l", R, NodeKind.List, None, ())


class TestDremel:
    def test_flat_required(self):
        shredded = shred_dremel([{"a": 1, "b": 2, "c": 3}], flat_schema())
        for leaf in flat_schema().leaves:
            assert shredded.rep_levels(leaf.path).tolist() == [0]
            assert shredded.def_levels(leaf.path).tolist() == [0]

    def test_absent_optional(self):
        schema = NestedSchema(SchemaNode.struct("root", [SchemaNode.atomic("o", I64, O)]))
        col = shred_dremel([{"o": None}], schema).columns[("root", "o")]
        assert (col.values, col.rep, col.defs) == ([None], [0], [0])

    def test_second_list_element_repeats(self):
        col = shred_dremel([{"items": [{"v": 1}, {"v": 2}]}], list_of_structs_schema()).columns[
            ("root", "items", "element", "v")]
        assert (col.values, col.rep, col.defs) == ([1, 2], [0, 1], [1, 1])

    def test_document_levels(self):
        shredded = shred_dremel(DOCUMENTS, document_schema())
        for path, (values, rep, defs) in DOCUMENT_LEVELS.items():
            col = shredded.columns[path]
            assert (col.values, col.rep, col.defs) == (values, rep, defs), path

    def test_document_round_trip(self):
        assert round_trips(DOCUMENTS, document_schema()) == (DOCUMENTS, DOCUMENTS)

    def test_empty_batch(self):
        assert assemble_dremel(shred_dremel([], document_schema())) == []

    def test_rep_above_max(self):
        shredded = shred_dremel([{"a": 1, "b": 2, "c": 3}], flat_schema())
        shredded.columns[("root", "a")].rep[0] = 1
        with pytest.raises(InvalidLevels):
            assemble_dremel(shredded)

    def test_value_without_max_def(self):
        shredded = shred_dremel(DOCUMENTS, document_schema())
        shredded.columns[("root", "Name", "Url")].defs[2] = 2
        with pytest.raises(InvalidLevels):
            assemble_dremel(shredded)

    def test_schema_mismatch(self):
        with pytest.raises(SchemaMismatch):
            shred_dremel([{"a": 1, "b": "two", "c": 3}], flat_schema())
        with pytest.raises(SchemaMismatch):
            shred_dremel([{"a": 1, "b": 2}], flat_schema())


class TestLengthPresence:
    def test_absent_optional_struct(self):
        lp = shred_length_presence([{"s": None}], optional_struct_schema())
        assert lp.presence[("root", "s")] == [False]
        assert lp.values[("root", "s", "x")] == [] and lp.values[("root", "s", "y")] == []

    def test_list_of_three(self):
        lp = shred_length_presence([{"items": [{"v": 1}, {"v": 2}, {"v": 3}]}], list_of_structs_schema())
        assert lp.lengths[("root", "items")] == [3]
        assert lp.values[("root", "items", "element", "v")] == [1, 2, 3]

    def test_document_columns(self):
        lp = shred_length_presence(DOCUMENTS, document_schema())
        assert lp.presence[("root", "Links")] == [True, True]
        assert lp.lengths[("root", "Name")] == [3, 1]
        assert lp.lengths[("root", "Name", "Language")] == [2, 0, 1, 0]
        assert lp.presence[("root", "Name", "Language", "Country")] == [True, False, True]

    def test_lengths_sum_to_children(self):
        lp = shred_length_presence(DOCUMENTS, document_schema())
        assert sum(lp.lengths[("root", "Name")]) == len(lp.lengths[("root", "Name", "Language")])
        assert sum(lp.lengths[("root", "Name", "Language")]) == len(lp.values[("root", "Name", "Language", "Code")])

    def test_truncated_lengths(self):
        lp = shred_length_presence(DOCUMENTS, document_schema())
        lp.lengths[("root", "Name")][0] = 9
        with pytest.raises(InvalidLevels):
            assemble_length_presence(lp)


class TestRoundTrip:
    @settings(max_examples=80)
    @given(st.integers(0, 2**32 - 1), st.integers(2, 6), st.integers(1, 4), st.integers(0, 12))
    def test_random_batches(self, seed, depth, fanout, count):
        rng = np.random.default_rng(seed)
        schema = random_schema(rng, max_depth=depth, max_fanout=fanout)
        records = random_records(schema, count, rng)
        dremel, lp = round_trips(records, schema)
        assert dremel == records
        assert lp == records

    @settings(max_examples=40)
    @given(st.integers(0, 2**32 - 1))
    def test_cross_model(self, seed):
        rng = np.random.default_rng(seed)
        schema = random_schema(rng, max_depth=5, max_fanout=4)
        records = random_records(schema, 6, rng, null_prob=0.4)
        assert assemble_dremel(shred_dremel(records, schema)) == \
            assemble_length_presence(shred_length_presence(records, schema))

    @pytest.mark.parametrize("depth", [1, 3, 8])
    def test_recursive(self, depth):
        records = recursive_records(depth, 50, seed=depth)
        assert round_trips(records, recursive_schema(depth)) == (records, records)


class TestPhysicalColumns:
    def test_flat(self):
        schema = flat_schema()
        assert [count_physical_columns(schema, m) for m in NestedModel] == [3, 3]

    def test_optional_struct(self):
        schema = optional_struct_schema()
        assert count_physical_columns(schema, NestedModel.Dremel) == 2
        assert count_physical_columns(schema, NestedModel.LengthPresence) == 3

    @pytest.mark.parametrize("depth", range(1, 9))
    def test_recursive_difference(self, depth):
        schema = recursive_schema(depth)
        # every level below the root adds one list and one optional struct
        structural = sum(1 for path, node in schema.nodes if len(path) > 1 and node.kind is not NodeKind.Atomic)
        diff = count_physical_columns(schema, NestedModel.LengthPresence) - count_physical_columns(
            schema, NestedModel.Dremel)
        assert diff == structural == 2 * (depth - 1)

    def test_recursive_depth_validated(self):
        with pytest.raises(InvalidConfig):
            recursive_schema(0)


class TestSizeTrend:
    def test_dremel_gap_grows_with_depth(self):
        gaps = []
        for depth in (2, 4, 6):
            records = recursive_records(depth, 2000, seed=1)
            schema = recursive_schema(depth)
            gaps.append(encoded_size(records, schema, NestedModel.Dremel)
                        - encoded_size(records, schema, NestedModel.LengthPresence))
        assert gaps == sorted(gaps) and gaps[0] < gaps[-1]
