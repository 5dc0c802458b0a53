"""Nested records: Dremel repetition/definition levels versus the
length/presence model.

Records are plain Python values: dicts for structs, lists for repeated
fields and lists, scalars for atomic leaves, ``None`` for an absent
optional node.  A node counts as a *list* when it is ``Repeated`` or of
kind ``List``; each list adds one repetition level and one definition
level (empty vs non-empty), and ``Optional`` adds one more definition
level (absent vs present).
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field

import numpy as np

from .column import LogicalType
from .encoders.bitpack import read_varint, write_varint
from .encoders.block import EncodedBlock
from .encoders.hybrid import rle_bp_hybrid_decode, rle_bp_hybrid_encode
from .encoders.plain import plain_decode, plain_encode
from .encoders.presence import presence_decode, presence_encode
from .errors import DecodeError, InvalidConfig, InvalidLevels, SchemaMismatch

ELEMENT = "element"


class Repetition(enum.Enum):
    Required = "required"
    Optional = "optional"
    Repeated = "repeated"


class NodeKind(enum.Enum):
    Atomic = "atomic"
    Struct = "struct"
    List = "list"


@dataclass(frozen=True)
class SchemaNode:
    name: str
    repetition: Repetition = Repetition.Required
    kind: NodeKind = NodeKind.Atomic
    logical_type: LogicalType | None = None
    children: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "children", tuple(self.children))
        if self.kind is NodeKind.Atomic:
            if self.logical_type is None or self.children:
                raise InvalidConfig(f"atomic node {self.name!r} needs a type and no children")
        elif self.kind is NodeKind.List:
            if len(self.children) != 1:
                raise InvalidConfig(f"list node {self.name!r} needs exactly one child")
        else:
            names = [c.name for c in self.children]
            if len(set(names)) != len(names):
                raise InvalidConfig(f"duplicate field names under {self.name!r}")

    @property
    def is_list(self) -> bool:
        return self.repetition is Repetition.Repeated or self.kind is NodeKind.List

    @property
    def def_contribution(self) -> int:
        return int(self.repetition is Repetition.Optional) + int(self.is_list)

    # constructors
    @classmethod
    def atomic(cls, name: str, lt: LogicalType, repetition: Repetition = Repetition.Required) -> "SchemaNode":
        return cls(name, repetition, NodeKind.Atomic, lt)

    @classmethod
    def struct(cls, name: str, children, repetition: Repetition = Repetition.Required) -> "SchemaNode":
        return cls(name, repetition, NodeKind.Struct, None, tuple(children))

    @classmethod
    def list_of(cls, name: str, element: "SchemaNode",
                repetition: Repetition = Repetition.Required) -> "SchemaNode":
        return cls(name, repetition, NodeKind.List, None, (element,))


@dataclass(frozen=True)
class LeafInfo:
    path: tuple
    node: SchemaNode
    max_def: int
    max_rep: int


class NestedSchema:
    def __init__(self, root: SchemaNode):
        if root.kind is not NodeKind.Struct or root.repetition is not Repetition.Required:
            raise InvalidConfig("the schema root must be a Required Struct")
        self.root = root
        self._leaves: list = []
        self._nodes: list = []
        self._levels: dict = {}
        self._walk(root, (), 0, 0)
        self._leaf_index = {leaf.path: i for i, leaf in enumerate(self._leaves)}

    def _walk(self, node, path, d, r):
        d += node.def_contribution
        r += int(node.is_list)
        path = path + (node.name,)
        self._levels[path] = (d, r)
        self._nodes.append((path, node))
        if node.kind is NodeKind.Atomic:
            self._leaves.append(LeafInfo(path, node, d, r))
        for child in node.children:
            self._walk(child, path, d, r)

    @property
    def leaves(self) -> list:
        return list(self._leaves)

    @property
    def nodes(self) -> list:
        return list(self._nodes)

    def levels(self, path: tuple) -> tuple:
        """(max_def, max_rep) of the node at ``path``."""
        return self._levels[path]

    def leaf_paths_under(self, path: tuple) -> list:
        n = len(path)
        return [leaf.path for leaf in self._leaves if leaf.path[:n] == path]

    def depth(self) -> int:
        return max(len(p) for p, _ in self._nodes)

    def __eq__(self, other):
        return isinstance(other, NestedSchema) and self.root == other.root

    def __repr__(self):
        return f"NestedSchema({len(self._leaves)} leaves, depth {self.depth()})"


class NestedModel(enum.Enum):
    Dremel = "dremel"
    LengthPresence = "length-presence"


def count_physical_columns(schema: NestedSchema, model: NestedModel) -> int:
    leaves = len(schema.leaves)
    if model is NestedModel.Dremel:
        return leaves
    aux = 0
    for _, node in schema.nodes:
        aux += int(node.repetition is Repetition.Optional) + int(node.is_list)
    return leaves + aux


# ---------------------------------------------------------------------------
# value checks

_PY_TYPES = {
    LogicalType.Int64: (int, np.integer),
    LogicalType.Float64: (float, int, np.floating, np.integer),
    LogicalType.Utf8String: (str,),
    LogicalType.Bool: (bool, np.bool_),
}


def _check_atomic(node: SchemaNode, value, path) -> None:
    ok = isinstance(value, _PY_TYPES[node.logical_type])
    if node.logical_type in (LogicalType.Int64, LogicalType.Float64) and isinstance(value, (bool, np.bool_)):
        ok = False
    if not ok:
        raise SchemaMismatch(f"{'.'.join(path)}: {value!r} is not {node.logical_type.name}")


def _check_list(value, path) -> None:
    if not isinstance(value, (list, tuple)):
        raise SchemaMismatch(f"{'.'.join(path)}: expected a list, got {type(value).__name__}")


# ---------------------------------------------------------------------------
# Dremel


@dataclass
class LeafLevels:
    values: list = field(default_factory=list)
    rep: list = field(default_factory=list)
    defs: list = field(default_factory=list)

    def __len__(self):
        return len(self.rep)


@dataclass
class ShreddedDremel:
    schema: NestedSchema
    columns: dict  # leaf path -> LeafLevels
    record_count: int = 0

    def rep_levels(self, path) -> np.ndarray:
        return np.asarray(self.columns[path].rep, dtype=np.int64)

    def def_levels(self, path) -> np.ndarray:
        return np.asarray(self.columns[path].defs, dtype=np.int64)


def shred_dremel(records, schema: NestedSchema) -> ShreddedDremel:
    columns = {leaf.path: LeafLevels() for leaf in schema.leaves}
    under = {}

    def leaves_under(path):
        if path not in under:
            under[path] = [columns[p] for p in schema.leaf_paths_under(path)]
        return under[path]

    def emit_missing(path, r, d):
        for col in leaves_under(path):
            col.values.append(None)
            col.rep.append(r)
            col.defs.append(d)

    def shred_node(node, path, value, r, d):
        if node.repetition is Repetition.Optional:
            if value is None:
                emit_missing(path, r, d)
                return
            d += 1
        elif value is None:
            raise SchemaMismatch(f"{'.'.join(path)}: required value missing")
        if node.is_list:
            _check_list(value, path)
            if len(value) == 0:
                emit_missing(path, r, d)
                return
            rl = schema.levels(path)[1]
            for i, elem in enumerate(value):
                ri = r if i == 0 else rl
                if node.kind is NodeKind.List:
                    child = node.children[0]
                    shred_node(child, path + (child.name,), elem, ri, d + 1)
                else:
                    shred_value(node, path, elem, ri, d + 1)
        else:
            shred_value(node, path, value, r, d)

    def shred_value(node, path, value, r, d):
        if node.kind is NodeKind.Atomic:
            _check_atomic(node, value, path)
            col = columns[path]
            col.values.append(value)
            col.rep.append(r)
            col.defs.append(d)
            return
        if not isinstance(value, dict):
            raise SchemaMismatch(f"{'.'.join(path)}: expected a struct, got {type(value).__name__}")
        extra = set(value) - {c.name for c in node.children}
        if extra:
            raise SchemaMismatch(f"{'.'.join(path)}: unknown fields {sorted(extra)}")
        for child in node.children:
            shred_node(child, path + (child.name,), value.get(child.name), r, d)

    root = schema.root
    count = 0
    for rec in records:
        shred_value(root, (root.name,), rec, 0, 0)
        count += 1
    return ShreddedDremel(schema, columns, count)


def _validate_levels(shredded: ShreddedDremel) -> None:
    schema = shredded.schema
    for leaf in schema.leaves:
        col = shredded.columns.get(leaf.path)
        if col is None:
            raise InvalidLevels(f"missing leaf column {'.'.join(leaf.path)}")
        if not len(col.values) == len(col.rep) == len(col.defs):
            raise InvalidLevels(f"{'.'.join(leaf.path)}: level and value lengths differ")
        if not col.rep:
            continue
        rep = np.asarray(col.rep)
        defs = np.asarray(col.defs)
        if rep.min() < 0 or rep.max() > leaf.max_rep:
            raise InvalidLevels(f"{'.'.join(leaf.path)}: repetition level outside [0, {leaf.max_rep}]")
        if defs.min() < 0 or defs.max() > leaf.max_def:
            raise InvalidLevels(f"{'.'.join(leaf.path)}: definition level outside [0, {leaf.max_def}]")
        if rep[0] != 0:
            raise InvalidLevels(f"{'.'.join(leaf.path)}: first entry must start a record")
        present = np.array([v is not None for v in col.values])
        if not np.array_equal(present, defs == leaf.max_def):
            raise InvalidLevels(f"{'.'.join(leaf.path)}: values must be present exactly at max definition")


def assemble_dremel(shredded: ShreddedDremel, schema: NestedSchema | None = None) -> list:
    schema = schema or shredded.schema
    if schema != shredded.schema:
        raise SchemaMismatch("shredded data belongs to a different schema")
    _validate_levels(shredded)
    cursors = {path: 0 for path in shredded.columns}
    cols = shredded.columns
    under = {}

    def leaves_under(path):
        if path not in under:
            under[path] = schema.leaf_paths_under(path)
        return under[path]

    def peek(path):
        i = cursors[path]
        col = cols[path]
        if i >= len(col.rep):
            return None
        return col.rep[i], col.defs[i]

    def consume_missing(path, below):
        for p in leaves_under(path):
            entry = peek(p)
            if entry is None or entry[1] >= below:
                raise InvalidLevels(f"{'.'.join(p)}: levels disagree with sibling columns")
            cursors[p] += 1

    def assemble_node(node, path, d):
        lead = leaves_under(path)[0]
        entry = peek(lead)
        if entry is None:
            raise InvalidLevels(f"{'.'.join(lead)}: ran out of entries")
        if node.repetition is Repetition.Optional:
            if entry[1] < d + 1:
                consume_missing(path, d + 1)
                return None
            d += 1
        if not node.is_list:
            return assemble_value(node, path, d)
        if entry[1] < d + 1:
            consume_missing(path, d + 1)
            return []
        rl = schema.levels(path)[1]
        out = []
        while True:
            if node.kind is NodeKind.List:
                child = node.children[0]
                out.append(assemble_node(child, path + (child.name,), d + 1))
            else:
                out.append(assemble_value(node, path, d + 1))
            nxt = peek(lead)
            if nxt is None or nxt[0] < rl:
                break
            if nxt[0] > rl:
                raise InvalidLevels(f"{'.'.join(lead)}: unexpected repetition level {nxt[0]}")
        return out

    def assemble_value(node, path, d):
        if node.kind is NodeKind.Atomic:
            i = cursors[path]
            col = cols[path]
            if i >= len(col.rep) or col.defs[i] < d:
                raise InvalidLevels(f"{'.'.join(path)}: levels disagree with sibling columns")
            cursors[path] = i + 1
            return col.values[i]
        return {child.name: assemble_node(child, path + (child.name,), d) for child in node.children}

    root = schema.root
    records = []
    lead = schema.leaves[0].path if schema.leaves else None
    if lead is None:
        return [{} for _ in range(shredded.record_count)]
    while peek(lead) is not None:
        starts = [peek(p) for p in cursors]
        if any(s is None or s[0] != 0 for s in starts):
            raise InvalidLevels("record boundary misaligned across leaf columns")
        records.append(assemble_value(root, (root.name,), 0))
    if any(cursors[p] != len(cols[p].rep) for p in cursors):
        raise InvalidLevels("leftover level entries after assembly")
    return records


# ---------------------------------------------------------------------------
# length / presence


@dataclass
class ShreddedLengthPresence:
    schema: NestedSchema
    values: dict  # leaf path -> list of present values
    presence: dict  # optional node path -> list of bool
    lengths: dict  # list node path -> list of int
    record_count: int = 0


def shred_length_presence(records, schema: NestedSchema) -> ShreddedLengthPresence:
    values = {leaf.path: [] for leaf in schema.leaves}
    presence = {p: [] for p, n in schema.nodes if n.repetition is Repetition.Optional}
    lengths = {p: [] for p, n in schema.nodes if n.is_list}

    def lp_node(node, path, value):
        if node.repetition is Repetition.Optional:
            presence[path].append(value is not None)
            if value is None:
                return
        elif value is None:
            raise SchemaMismatch(f"{'.'.join(path)}: required value missing")
        if node.is_list:
            _check_list(value, path)
            lengths[path].append(len(value))
            for elem in value:
                if node.kind is NodeKind.List:
                    child = node.children[0]
                    lp_node(child, path + (child.name,), elem)
                else:
                    lp_value(node, path, elem)
        else:
            lp_value(node, path, value)

    def lp_value(node, path, value):
        if node.kind is NodeKind.Atomic:
            _check_atomic(node, value, path)
            values[path].append(value)
            return
        if not isinstance(value, dict):
            raise SchemaMismatch(f"{'.'.join(path)}: expected a struct, got {type(value).__name__}")
        extra = set(value) - {c.name for c in node.children}
        if extra:
            raise SchemaMismatch(f"{'.'.join(path)}: unknown fields {sorted(extra)}")
        for child in node.children:
            lp_node(child, path + (child.name,), value.get(child.name))

    root = schema.root
    count = 0
    for rec in records:
        lp_value(root, (root.name,), rec)
        count += 1
    return ShreddedLengthPresence(schema, values, presence, lengths, count)


def assemble_length_presence(shredded: ShreddedLengthPresence, schema: NestedSchema | None = None) -> list:
    schema = schema or shredded.schema
    if schema != shredded.schema:
        raise SchemaMismatch("shredded data belongs to a different schema")
    cursors = {}

    def take(store, path, what):
        seq = store.get(path)
        if seq is None:
            raise InvalidLevels(f"missing {what} column {'.'.join(path)}")
        i = cursors.get((what, path), 0)
        if i >= len(seq):
            raise InvalidLevels(f"{what} column {'.'.join(path)} exhausted")
        cursors[(what, path)] = i + 1
        return seq[i]

    def lp_node(node, path):
        if node.repetition is Repetition.Optional and not take(shredded.presence, path, "presence"):
            return None
        if node.is_list:
            n = take(shredded.lengths, path, "lengths")
            if n < 0:
                raise InvalidLevels(f"negative length in {'.'.join(path)}")
            if node.kind is NodeKind.List:
                child = node.children[0]
                return [lp_node(child, path + (child.name,)) for _ in range(n)]
            return [lp_value(node, path) for _ in range(n)]
        return lp_value(node, path)

    def lp_value(node, path):
        if node.kind is NodeKind.Atomic:
            return take(shredded.values, path, "values")
        return {child.name: lp_node(child, path + (child.name,)) for child in node.children}

    root = schema.root
    records = [lp_value(root, (root.name,)) for _ in range(shredded.record_count)]
    for what, store in (("values", shredded.values), ("presence", shredded.presence),
                        ("lengths", shredded.lengths)):
        for path, seq in store.items():
            if cursors.get((what, path), 0) != len(seq):
                raise InvalidLevels(f"leftover entries in {what} column {'.'.join(path)}")
    return records


# ---------------------------------------------------------------------------
# encoded form (for size and decode-cost comparisons)


def _values_block(values: list, lt: LogicalType) -> bytes:
    present = [v for v in values if v is not None]
    arr = np.array(present, dtype=object if lt is LogicalType.Utf8String else None)
    if lt is LogicalType.Int64:
        arr = arr.astype(np.int64)
    elif lt is LogicalType.Float64:
        arr = arr.astype(np.float64)
    elif lt is LogicalType.Bool:
        arr = arr.astype(np.bool_)
    out = bytearray()
    write_varint(out, len(present))
    out += plain_encode(arr, lt)
    return bytes(out)


def _read_values(buf, pos, lt):
    n, pos = read_varint(buf, pos)
    arr, pos = plain_decode(buf, n, lt, pos)
    return arr.tolist(), pos


def encode_dremel(shredded: ShreddedDremel) -> bytes:
    """Per leaf: hybrid-coded repetition and definition levels (omitted when
    the leaf's maximum is 0) followed by the present values, plain."""
    out = bytearray()
    write_varint(out, shredded.record_count)
    for leaf in shredded.schema.leaves:
        col = shredded.columns[leaf.path]
        write_varint(out, len(col))
        if leaf.max_rep:
            out += rle_bp_hybrid_encode(np.asarray(col.rep, dtype=np.int64)).to_bytes()
        if leaf.max_def:
            out += rle_bp_hybrid_encode(np.asarray(col.defs, dtype=np.int64)).to_bytes()
        out += _values_block(col.values, leaf.node.logical_type)
    return bytes(out)


def decode_dremel(buf, schema: NestedSchema) -> ShreddedDremel:
    count, pos = read_varint(buf, 0)
    columns = {}
    for leaf in schema.leaves:
        n, pos = read_varint(buf, pos)
        rep = np.zeros(n, dtype=np.int64)
        defs = np.zeros(n, dtype=np.int64)
        if leaf.max_rep:
            block, pos = EncodedBlock.from_bytes(buf, pos)
            rep = rle_bp_hybrid_decode(block).astype(np.int64)
        if leaf.max_def:
            block, pos = EncodedBlock.from_bytes(buf, pos)
            defs = rle_bp_hybrid_decode(block).astype(np.int64)
        present, pos = _read_values(buf, pos, leaf.node.logical_type)
        if len(rep) != n or len(defs) != n:
            raise DecodeError(f"{'.'.join(leaf.path)}: level stream length mismatch")
        mask = defs == leaf.max_def
        if int(mask.sum()) != len(present):
            raise DecodeError(f"{'.'.join(leaf.path)}: value count mismatch")
        values = [None] * n
        for i, v in zip(np.flatnonzero(mask).tolist(), present):
            values[i] = v
        columns[leaf.path] = LeafLevels(values, rep.tolist(), defs.tolist())
    return ShreddedDremel(schema, columns, count)


def encode_length_presence(shredded: ShreddedLengthPresence) -> bytes:
    """Per node in schema order: presence bitmaps (byte-RLE), lengths
    (the same hybrid encoder as Dremel levels, so the two models differ only
    in what they store), then leaf values, plain."""
    out = bytearray()
    write_varint(out, shredded.record_count)
    for path, node in shredded.schema.nodes:
        if node.repetition is Repetition.Optional:
            bits = presence_encode(np.asarray(shredded.presence[path], dtype=np.bool_))
            write_varint(out, len(shredded.presence[path]))
            write_varint(out, len(bits))
            out += bits
        if node.is_list:
            out += rle_bp_hybrid_encode(np.asarray(shredded.lengths[path], dtype=np.int64)).to_bytes()
        if node.kind is NodeKind.Atomic:
            out += _values_block(shredded.values[path], node.logical_type)
    return bytes(out)


def decode_length_presence(buf, schema: NestedSchema) -> ShreddedLengthPresence:
    count, pos = read_varint(buf, 0)
    values, presence, lengths = {}, {}, {}
    for path, node in schema.nodes:
        if node.repetition is Repetition.Optional:
            n, pos = read_varint(buf, pos)
            nbytes, pos = read_varint(buf, pos)
            bits = presence_decode(buf, pos, pos + nbytes) if nbytes else np.ones(0, dtype=np.bool_)
            if len(bits) != n:
                raise DecodeError(f"{'.'.join(path)}: presence length mismatch")
            presence[path] = bits.tolist()
            pos += nbytes
        if node.is_list:
            block, pos = EncodedBlock.from_bytes(buf, pos)
            lengths[path] = rle_bp_hybrid_decode(block).astype(np.int64).tolist()
        if node.kind is NodeKind.Atomic:
            values[path], pos = _read_values(buf, pos, node.logical_type)
    return ShreddedLengthPresence(schema, values, presence, lengths, count)


def encoded_size(records, schema: NestedSchema, model: NestedModel) -> int:
    if model is NestedModel.Dremel:
        return len(encode_dremel(shred_dremel(records, schema)))
    return len(encode_length_presence(shred_length_presence(records, schema)))


# ---------------------------------------------------------------------------
# the recursive benchmark schema and synthetic records

LIST_LENGTH_WEIGHTS = ((1, 0.97), (0, 0.01), (2, 0.02))


def recursive_schema(depth: int) -> NestedSchema:
    """A struct holding a float and, above the maximum depth, a list of
    structs with the same shape.  Depth 1 is a single flat float field."""
    if depth < 1:
        raise InvalidConfig("depth must be at least 1")

    def level(k: int, name: str, repetition: Repetition) -> SchemaNode:
        fields = [SchemaNode.atomic("value", LogicalType.Float64)]
        if k < depth:
            fields.append(SchemaNode.list_of("children", level(k + 1, ELEMENT, Repetition.Optional)))
        return SchemaNode.struct(name, fields, repetition)

    return NestedSchema(level(1, "root", Repetition.Required))


def recursive_records(depth: int, count: int, seed: int) -> list:
    """Records for :func:`recursive_schema` where lists hold one struct 97% of
    the time, none 1% and two 2%, until the maximum depth stops growth."""
    rng = np.random.default_rng(seed)
    sizes = np.array([k for k, _ in LIST_LENGTH_WEIGHTS])
    probs = np.array([p for _, p in LIST_LENGTH_WEIGHTS])

    def make(k: int) -> dict:
        rec = {"value": float(np.round(rng.random() * 1000, 2))}
        if k < depth:
            n = int(sizes[rng.choice(len(sizes), p=probs)])
            rec["children"] = [make(k + 1) for _ in range(n)]
        return rec

    return [make(1) for _ in range(count)]


def random_schema(rng: np.random.Generator, max_depth: int = 4, max_fanout: int = 3) -> NestedSchema:
    """Random schema with every repetition, kind and atomic type in play."""
    types = list(LogicalType)
    counter = iter(range(1 << 30))

    def node(depth: int) -> SchemaNode:
        name = f"f{next(counter)}"
        rep = [Repetition.Required, Repetition.Optional, Repetition.Repeated][int(rng.integers(3))]
        choice = int(rng.integers(3)) if depth < max_depth else 0
        if choice == 0:
            return SchemaNode.atomic(name, types[int(rng.integers(len(types)))], rep)
        if choice == 1:
            kids = [node(depth + 1) for _ in range(int(rng.integers(1, max_fanout + 1)))]
            return SchemaNode.struct(name, kids, rep)
        inner = node(depth + 1)
        inner = SchemaNode(ELEMENT, inner.repetition if inner.repetition is not Repetition.Repeated
                           else Repetition.Optional, inner.kind, inner.logical_type, inner.children)
        return SchemaNode.list_of(name, inner, rep if rep is not Repetition.Repeated else Repetition.Optional)

    kids = [node(2) for _ in range(int(rng.integers(1, max_fanout + 1)))]
    return NestedSchema(SchemaNode.struct("root", kids))


def random_records(schema: NestedSchema, count: int, rng: np.random.Generator,
                   null_prob: float = 0.2, max_list: int = 3) -> list:
    def atomic(lt: LogicalType):
        if lt is LogicalType.Int64:
            return int(rng.integers(-1000, 1000))
        if lt is LogicalType.Float64:
            return float(rng.integers(-10000, 10000)) / 100
        if lt is LogicalType.Bool:
            return bool(rng.integers(2))
        return "".join(chr(97 + int(c)) for c in rng.integers(0, 26, int(rng.integers(0, 6))))

    def value(node):
        if node.kind is NodeKind.Atomic:
            return atomic(node.logical_type)
        return {c.name: make(c) for c in node.children}

    def make(node):
        if node.repetition is Repetition.Optional and rng.random() < null_prob:
            return None
        if node.is_list:
            n = int(rng.integers(0, max_list + 1))
            if node.kind is NodeKind.List:
                return [make(node.children[0]) for _ in range(n)]
            return [value(node) for _ in range(n)]
        return value(node)

    return [value(schema.root) for _ in range(count)]
