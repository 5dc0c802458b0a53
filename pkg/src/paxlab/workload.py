"""Synthetic column, table and predicate generation.

Columns are generated on integer ordinals into a sorted pool of distinct
values: ordinal order equals value order, so sortedness work is done once
on small integers and the pool is mapped in at the end.  The mapping from
frequency rank to pool ordinal comes from its own random stream, so two
configs that differ only in value range produce the same ordinal sequence.
"""

from __future__ import annotations

import enum
import json
import math
from dataclasses import dataclass, field, replace
from functools import lru_cache

import numpy as np

from .column import PLACEHOLDERS, ColumnVector, LogicalType, Table, dtype_for, fit_zipf_s
from .errors import InvalidConfig
from .predicates import PredicateSpec

BLOCK = 512
SORT_TOLERANCE = 0.02
ALPHABET = np.frombuffer(b"abcdefghijklmnopqrstuvwxyz0123456789", dtype=np.uint8)


class Magnitude(enum.Enum):
    Small = "small"
    Medium = "medium"
    Large = "large"


INT_BITS = {Magnitude.Small: 12, Magnitude.Medium: 20, Magnitude.Large: 40}
STRING_MEAN_LEN = {Magnitude.Small: 8, Magnitude.Medium: 24, Magnitude.Large: 64}
FLOAT_SCALE = 100


class SelectivityLevel(enum.Enum):
    Low = "low"
    Mid = "mid"
    High = "high"

    @property
    def fraction(self) -> float:
        return {SelectivityLevel.Low: 1e-5, SelectivityLevel.Mid: 1e-3, SelectivityLevel.High: 0.1}[self]


@dataclass(frozen=True)
class ValueRangeSpec:
    """Either a magnitude class or explicit parameters.

    Numbers: ``mean`` and ``half_width`` give ``[mean - hw, mean + hw]``
    (for floats this bounds the integral part).  Strings: ``mean_len`` and
    ``len_variance`` parameterize the normal length distribution.
    """

    magnitude: Magnitude | None = Magnitude.Medium
    mean: float | None = None
    half_width: float | None = None
    mean_len: float | None = None
    len_variance: float | None = None

    def __post_init__(self):
        if self.half_width is not None and self.half_width <= 0:
            raise InvalidConfig("half_width must be positive")
        if self.mean_len is not None and self.mean_len <= 0:
            raise InvalidConfig("mean_len must be positive")
        if self.len_variance is not None and self.len_variance < 0:
            raise InvalidConfig("len_variance must be non-negative")
        if self.magnitude is None and self.half_width is None and self.mean_len is None:
            raise InvalidConfig("value range needs a magnitude class or explicit parameters")

    @classmethod
    def of(cls, magnitude: Magnitude) -> "ValueRangeSpec":
        return cls(magnitude)

    def integer_bounds(self) -> tuple:
        """Half-open ``[lo, hi)`` of the integral value domain."""
        if self.half_width is not None:
            mean = self.mean or 0.0
            return int(math.floor(mean - self.half_width)), int(math.floor(mean + self.half_width)) + 1
        return 0, 1 << INT_BITS[self.magnitude or Magnitude.Medium]

    def string_lengths(self) -> tuple:
        """(mean, standard deviation) of string byte lengths."""
        if self.mean_len is not None:
            var = self.len_variance if self.len_variance is not None else (self.mean_len / 4) ** 2
            return float(self.mean_len), math.sqrt(var)
        mean = STRING_MEAN_LEN[self.magnitude or Magnitude.Medium]
        return float(mean), mean / 4

    def capacity(self, lt: LogicalType) -> float:
        if lt is LogicalType.Bool:
            return 2
        if lt is LogicalType.Utf8String:
            return math.inf
        lo, hi = self.integer_bounds()
        return (hi - lo) * (FLOAT_SCALE if lt is LogicalType.Float64 else 1)

    def to_dict(self) -> dict:
        return {k: (v.value if isinstance(v, Magnitude) else v)
                for k, v in self.__dict__.items() if v is not None}

    @classmethod
    def from_dict(cls, d: dict) -> "ValueRangeSpec":
        d = dict(d)
        mag = d.pop("magnitude", None)
        return cls(Magnitude(mag) if mag is not None else None, **d)


@dataclass(frozen=True)
class ColumnConfig:
    logical_type: LogicalType
    rows: int
    ndv_ratio: float
    null_ratio: float = 0.0
    value_range: ValueRangeSpec = field(default_factory=ValueRangeSpec)
    sortedness_target: float = 0.0
    zipf_s: float = 0.0
    seed: int = 0

    def __post_init__(self):
        for name in ("ndv_ratio", "null_ratio", "sortedness_target"):
            v = getattr(self, name)
            if not 0 <= v <= 1:
                raise InvalidConfig(f"{name} must lie in [0, 1], got {v}")
        if self.rows < 1:
            raise InvalidConfig("rows must be positive")
        if self.ndv_ratio * self.rows < 1 - 1e-9:
            raise InvalidConfig("ndv_ratio * rows must be at least 1")
        if self.zipf_s < 0:
            raise InvalidConfig("zipf_s must be non-negative")

    @property
    def distinct_target(self) -> int:
        return max(1, int(round(self.ndv_ratio * self.rows)))

    @property
    def null_target(self) -> int:
        return int(round(self.null_ratio * self.rows))

    def to_dict(self) -> dict:
        return {"logical_type": self.logical_type.name, "rows": self.rows, "ndv_ratio": self.ndv_ratio,
                "null_ratio": self.null_ratio, "value_range": self.value_range.to_dict(),
                "sortedness_target": self.sortedness_target, "zipf_s": self.zipf_s, "seed": self.seed}

    @classmethod
    def from_dict(cls, d: dict) -> "ColumnConfig":
        try:
            return cls(LogicalType[d["logical_type"]], int(d["rows"]), float(d["ndv_ratio"]),
                       float(d.get("null_ratio", 0.0)), ValueRangeSpec.from_dict(d.get("value_range", {"magnitude": "medium"})),
                       float(d.get("sortedness_target", 0.0)), float(d.get("zipf_s", 0.0)), int(d.get("seed", 0)))
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidConfig(f"bad column config: {exc}") from exc


# ---------------------------------------------------------------------------
# zipf


@lru_cache(maxsize=64)
def _zipf_cdf(count: int, s: float) -> np.ndarray:
    weights = np.power(np.arange(1, count + 1, dtype=np.float64), -s)
    cdf = np.cumsum(weights)
    return cdf / cdf[-1]


def zipf_probabilities(count: int, s: float) -> np.ndarray:
    cdf = _zipf_cdf(count, float(s))
    return np.diff(np.concatenate(([0.0], cdf)))


def sample_zipf(count: int, s: float, rng: np.random.Generator, size=None):
    """Rank(s) in ``[1, count]`` with P(k) proportional to ``k ** -s``."""
    if count < 1:
        raise InvalidConfig("zipf needs at least one value")
    if s < 0:
        raise InvalidConfig("zipf exponent must be non-negative")
    cdf = _zipf_cdf(int(count), float(s))
    u = rng.random(size)
    k = np.searchsorted(cdf, u, side="right") + 1
    k = np.minimum(k, count)
    return int(k) if size is None else k.astype(np.int64)


@lru_cache(maxsize=256)
def calibrated_zipf_s(distinct: int, present: int, s: float) -> float:
    """Sampling exponent whose column, once every value is placed once and
    the rest drawn by Zipf, fits back to ``s`` under the grid fit."""
    if s <= 0 or distinct <= 2 or present <= distinct:
        return s

    def fitted(x: float) -> float:
        expected = 1.0 + (present - distinct) * zipf_probabilities(distinct, x)
        return fit_zipf_s(expected)

    if fitted(s) >= s:
        return s
    lo, hi = s, s + 3.0
    if fitted(hi) < s:
        return hi
    for _ in range(14):
        mid = (lo + hi) / 2
        if fitted(mid) >= s:
            hi = mid
        else:
            lo = mid
    return round(hi, 4)


# ---------------------------------------------------------------------------
# value pools


def _distinct_integers(lo: int, hi: int, count: int, rng: np.random.Generator) -> np.ndarray:
    span = hi - lo
    if count > span:
        raise InvalidConfig(f"{count} distinct values do not fit in a range of {span}")
    if span <= 8 * count or span <= 1 << 22:
        picked = rng.choice(span, size=count, replace=False)
    else:
        picked = np.empty(0, dtype=np.int64)
        while len(picked) < count:
            extra = rng.integers(0, span, size=int((count - len(picked)) * 1.05) + 16)
            picked = np.unique(np.concatenate([picked, extra]))
        if len(picked) > count:
            picked = rng.choice(picked, size=count, replace=False)
    return np.sort(np.asarray(picked, dtype=np.int64) + lo)


def _base36(i: int, width: int) -> str:
    return np.base_repr(i, 36).lower().rjust(width, "0")


def _distinct_strings(count: int, spec: ValueRangeSpec, rng: np.random.Generator) -> np.ndarray:
    """Lowercase alphanumeric strings made distinct by a fixed-width counter suffix."""
    mean, sd = spec.string_lengths()
    width = len(_base36(max(count - 1, 0), 1))
    lengths = np.maximum(np.rint(rng.normal(mean, sd, count)).astype(np.int64), 1)
    prefix_len = np.maximum(lengths - width, 0)
    chars = ALPHABET[rng.integers(0, len(ALPHABET), int(prefix_len.sum()))].tobytes().decode("ascii")
    ends = np.cumsum(prefix_len).tolist()
    starts = [0] + ends[:-1]
    out = np.empty(count, dtype=object)
    out[:] = [chars[a:b] + _base36(i, width) for i, (a, b) in enumerate(zip(starts, ends))]
    return np.sort(out)


def build_pool(lt: LogicalType, count: int, spec: ValueRangeSpec, rng: np.random.Generator) -> np.ndarray:
    """``count`` distinct values in ascending order."""
    if count > spec.capacity(lt):
        raise InvalidConfig(f"{count} distinct {lt.name} values do not fit the value range")
    if lt is LogicalType.Bool:
        return np.array([False, True])[:count] if count == 2 else np.array([bool(rng.integers(2))])
    if lt is LogicalType.Utf8String:
        return _distinct_strings(count, spec, rng)
    lo, hi = spec.integer_bounds()
    if lt is LogicalType.Float64:
        return _distinct_integers(lo * FLOAT_SCALE, hi * FLOAT_SCALE, count, rng) / FLOAT_SCALE
    return _distinct_integers(lo, hi, count, rng)


# ---------------------------------------------------------------------------
# sortedness degradation


def _matrix_scores(m: np.ndarray, lengths: np.ndarray) -> np.ndarray:
    a, b = m[:, :-1], m[:, 1:]
    valid = np.arange(m.shape[1] - 1)[None, :] < (lengths[:, None] - 1)
    asc = ((a < b) & valid).sum(axis=1)
    desc = ((a > b) & valid).sum(axis=1)
    eq = ((a == b) & valid).sum(axis=1)
    numer = np.maximum(asc, desc) + eq - lengths // 2
    denom = (lengths + 1) // 2 - 1
    scores = np.where(denom > 0, numer / np.maximum(denom, 1), 1.0)
    return np.clip(scores, 0.0, 1.0)


def degrade_sortedness(ordinals: np.ndarray, target: float, rng: np.random.Generator,
                       block_size: int = BLOCK, tolerance: float = SORT_TOLERANCE,
                       max_rounds: int = 4000) -> np.ndarray:
    """Sort each block, then swap random pairs until its score is within
    ``target +- tolerance`` (aiming just above the target).  Blocks that stop improving (their random-order
    floor lies above the target) are left where they stalled."""
    n = len(ordinals)
    if n == 0:
        return ordinals.copy()
    nblocks = -(-n // block_size)
    m = np.zeros((nblocks, block_size), dtype=np.int64)
    flat = np.empty(nblocks * block_size, dtype=np.int64)
    flat[:n] = ordinals
    flat[n:] = ordinals.max() + 1
    m[:] = flat.reshape(nblocks, block_size)
    m.sort(axis=1)
    lengths = np.full(nblocks, block_size)
    lengths[-1] = n - (nblocks - 1) * block_size
    if target < 1.0:
        scores = _matrix_scores(m, lengths)
        cap = np.full(nblocks, max(1, block_size // 8))
        best = scores.copy()
        stale = np.zeros(nblocks, dtype=np.int64)
        stop = target + tolerance / 4
        active = np.flatnonzero((scores > stop) & (lengths >= 2))
        rounds = 0
        while len(active) and rounds < max_rounds:
            rounds += 1
            gap = scores[active] - target
            k = np.minimum(cap[active], np.maximum(1, np.ceil(gap * lengths[active] / 16).astype(np.int64)))
            saved = m[active].copy()
            for r in range(int(k.max())):
                rows = active[k > r]
                ln = lengths[rows]
                i = rng.integers(0, ln)
                j = rng.integers(0, ln)
                vi = m[rows, i]
                m[rows, i] = m[rows, j]
                m[rows, j] = vi
            new = _matrix_scores(m[active], lengths[active])
            over = new < target - tolerance
            if over.any():
                m[active[over]] = saved[over]
                new[over] = scores[active[over]]
                cap[active[over]] = np.maximum(1, k[over] // 2)
            scores[active] = new
            improved = new < best[active] - 1e-12
            best[active] = np.minimum(best[active], new)
            stale[active] = np.where(improved, 0, stale[active] + 1)
            active = active[(new > stop) & (stale[active] < 40)]
    return m.reshape(-1)[:n] if lengths[-1] == block_size else np.concatenate(
        [m[:-1].reshape(-1), m[-1, :lengths[-1]]])


# ---------------------------------------------------------------------------
# columns


def _streams(seed: int, count: int) -> list:
    return [np.random.default_rng(s) for s in np.random.SeedSequence(seed & ((1 << 64) - 1)).spawn(count)]


def generate_ordinals(cfg: ColumnConfig, present: int) -> np.ndarray:
    """Ordinal (pool index) sequence of the present values."""
    distinct = cfg.distinct_target
    if distinct > present:
        raise InvalidConfig(f"{distinct} distinct values need at least as many present rows, got {present}")
    _, rank_rng, perm_rng, order_rng, swap_rng, _ = _streams(cfg.seed, 6)
    s = calibrated_zipf_s(distinct, present, round(cfg.zipf_s, 4))
    ranks = np.concatenate([np.arange(1, distinct + 1), sample_zipf(distinct, s, rank_rng, present - distinct)])
    rank_to_ordinal = perm_rng.permutation(distinct)
    ordinals = rank_to_ordinal[ranks - 1]
    ordinals = ordinals[order_rng.permutation(present)]
    return degrade_sortedness(ordinals, cfg.sortedness_target, swap_rng)


def generate_column(cfg: ColumnConfig) -> ColumnVector:
    """Column matching ``cfg``; deterministic in ``cfg.seed``.

    Nulls occupy a uniform-random subset of slots; NDV and sortedness are
    realized over the present values, which is where they are measured.
    """
    lt = cfg.logical_type
    nnull = cfg.null_target
    present = cfg.rows - nnull
    streams = _streams(cfg.seed, 6)
    pool_rng, null_rng = streams[0], streams[5]
    validity = np.ones(cfg.rows, dtype=np.bool_)
    if nnull:
        validity[null_rng.choice(cfg.rows, size=nnull, replace=False)] = False
    values = np.full(cfg.rows, PLACEHOLDERS[lt], dtype=dtype_for(lt))
    if present:
        distinct = min(cfg.distinct_target, 2) if lt is LogicalType.Bool else cfg.distinct_target
        if distinct != cfg.distinct_target:
            cfg = replace(cfg, ndv_ratio=distinct / cfg.rows)
        pool = build_pool(lt, distinct, cfg.value_range, pool_rng)
        values[validity] = pool[generate_ordinals(cfg, present)]
    return ColumnVector(lt, values, validity)


# ---------------------------------------------------------------------------
# workloads


@dataclass(frozen=True)
class WorkloadSpec:
    name: str
    type_mix: dict
    ndv_ratio: float
    null_ratio: float
    value_range: Magnitude
    sortedness: float
    zipf_s: float
    selectivity_level: SelectivityLevel
    # source-workload mix for composite workloads (core)
    components: dict = field(default_factory=dict)

    def __post_init__(self):
        if self.name not in WORKLOAD_NAMES:
            raise InvalidConfig(f"unknown workload name {self.name!r}")
        mix = {LogicalType[k] if isinstance(k, str) else LogicalType(k): float(v) for k, v in self.type_mix.items()}
        object.__setattr__(self, "type_mix", mix)
        if abs(sum(mix.values()) - 1.0) > 0.01 + 1e-9 or any(v < 0 for v in mix.values()):
            raise InvalidConfig(f"type mix must sum to 1 +- 0.01, got {sum(mix.values()):.4f}")
        if self.components and abs(sum(self.components.values()) - 1.0) > 0.01 + 1e-9:
            raise InvalidConfig("component mix must sum to 1")

    @property
    def selectivity(self) -> float:
        return self.selectivity_level.fraction

    def to_dict(self) -> dict:
        return {"name": self.name, "type_mix": {lt.name: v for lt, v in self.type_mix.items()},
                "ndv_ratio": self.ndv_ratio, "null_ratio": self.null_ratio,
                "value_range": self.value_range.value, "sortedness": self.sortedness, "zipf_s": self.zipf_s,
                "selectivity_level": self.selectivity_level.value, "components": dict(self.components)}

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), indent=2)

    @classmethod
    def from_dict(cls, d: dict) -> "WorkloadSpec":
        try:
            return cls(d["name"], dict(d["type_mix"]), float(d["ndv_ratio"]), float(d["null_ratio"]),
                       Magnitude(d["value_range"]), float(d["sortedness"]), float(d["zipf_s"]),
                       SelectivityLevel(d["selectivity_level"]), dict(d.get("components", {})))
        except (KeyError, ValueError, TypeError) as exc:
            raise InvalidConfig(f"bad workload spec: {exc}") from exc

    @classmethod
    def from_json(cls, text: str) -> "WorkloadSpec":
        try:
            return cls.from_dict(json.loads(text))
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"workload JSON does not parse: {exc}") from exc


WORKLOAD_NAMES = ("core", "bi", "classic", "geo", "log", "ml", "custom")
_I, _F, _S, _B = LogicalType.Int64, LogicalType.Float64, LogicalType.Utf8String, LogicalType.Bool

# type mixes; the published rows are rounded and may miss 1 by up to 0.01
_TYPE_MIX = {
    "core": (0.37, 0.21, 0.41, 0.003),
    "bi": (0.46, 0.20, 0.34, 0.002),
    "classic": (0.33, 0.06, 0.61, 0.0),
    "geo": (0.31, 0.08, 0.61, 0.0),
    "log": (0.22, 0.46, 0.32, 0.0),
    "ml": (0.24, 0.39, 0.37, 0.01),
}
# ndv ratio, null ratio, value range, sortedness, zipf s, selectivity
_PROPERTIES = {
    "core": (0.12, 0.09, Magnitude.Medium, 0.54, 1.12, SelectivityLevel.Mid),
    "bi": (0.08, 0.11, Magnitude.Small, 0.57, 1.10, SelectivityLevel.High),
    "classic": (0.25, 0.09, Magnitude.Large, 0.49, 1.42, SelectivityLevel.High),
    "geo": (0.18, 0.13, Magnitude.Small, 0.45, 0.89, SelectivityLevel.Low),
    "log": (0.08, 0.02, Magnitude.Small, 0.75, 1.26, SelectivityLevel.Low),
    "ml": (0.12, 0.00, Magnitude.Large, 0.30, 1.00, SelectivityLevel.Mid),
}
CORE_COMPONENTS = {"bi": 0.50, "classic": 0.21, "geo": 0.07, "log": 0.07, "ml": 0.15}


def workload_preset(name: str) -> WorkloadSpec:
    key = "core" if name == "custom" else name
    if key not in _PROPERTIES:
        raise InvalidConfig(f"unknown workload {name!r}; choose from {list(WORKLOAD_NAMES)}")
    mix = dict(zip((_I, _F, _S, _B), _TYPE_MIX[key]))
    ndv, nulls, vr, sort, s, sel = _PROPERTIES[key]
    components = dict(CORE_COMPONENTS) if key == "core" else {}
    return WorkloadSpec(name, mix, ndv, nulls, vr, sort, s, sel, components)


def assign_types(type_mix: dict, cols: int) -> list:
    """Largest-remainder apportionment of ``cols`` columns over the mix.

    Returned in canonical type order (Int64, Float64, Utf8String, Bool).
    """
    types = [lt for lt in LogicalType if type_mix.get(lt, 0) > 0]
    weights = np.array([type_mix[lt] for lt in types], dtype=np.float64)
    quota = weights / weights.sum() * cols
    counts = np.floor(quota).astype(np.int64)
    remainder = cols - int(counts.sum())
    order = sorted(range(len(types)), key=lambda i: (-(quota[i] - counts[i]), i))
    for i in order[:remainder]:
        counts[i] += 1
    return [lt for lt, c in zip(types, counts) for _ in range(c)]


def derive_column_config(spec: WorkloadSpec, lt: LogicalType, rows: int, seed: int) -> ColumnConfig:
    """Column config at the workload's property levels.

    The value range class is widened when it cannot hold twice the
    distinct-value target, and the distinct count is capped by the rows
    that remain present (two for booleans).
    """
    nnull = int(round(spec.null_ratio * rows))
    present = rows - nnull
    distinct = max(1, int(round(spec.ndv_ratio * rows)))
    distinct = min(distinct, max(present, 1), 2 if lt is LogicalType.Bool else distinct)
    magnitude = spec.value_range
    classes = list(Magnitude)
    while ValueRangeSpec(magnitude).capacity(lt) < 2 * distinct and magnitude is not classes[-1]:
        magnitude = classes[classes.index(magnitude) + 1]
    return ColumnConfig(lt, rows, distinct / rows, nnull / rows, ValueRangeSpec(magnitude),
                        spec.sortedness, spec.zipf_s, seed)


def _empty_column(lt: LogicalType) -> ColumnVector:
    return ColumnVector(lt, np.empty(0, dtype=dtype_for(lt)), np.empty(0, dtype=np.bool_))


def column_plan(spec: WorkloadSpec, rows: int, cols: int, seed: int) -> list:
    """``[(name, source workload, LogicalType, column seed)]`` for a table."""
    if cols < 1:
        raise InvalidConfig("a table needs at least one column")
    rng = np.random.default_rng(np.random.SeedSequence([seed & ((1 << 64) - 1), 0x7AB1E]))
    types = assign_types(spec.type_mix, cols)
    types = [types[i] for i in rng.permutation(cols)]
    if spec.components:
        names = list(spec.components)
        probs = np.array([spec.components[n] for n in names])
        sources = [names[i] for i in rng.choice(len(names), size=cols, p=probs / probs.sum())]
    else:
        sources = [spec.name] * cols
    seeds = rng.integers(0, 1 << 63, size=cols)
    return [(f"c{i}", sources[i], types[i], int(seeds[i])) for i in range(cols)]


def generate_table(spec: WorkloadSpec, rows: int, cols: int, seed: int) -> Table:
    if rows < 0:
        raise InvalidConfig("rows must be non-negative")
    columns = []
    for name, source, lt, col_seed in column_plan(spec, rows, cols, seed):
        if rows == 0:
            columns.append((name, _empty_column(lt)))
            continue
        level_spec = spec if source == spec.name else workload_preset(source)
        columns.append((name, generate_column(derive_column_config(level_spec, lt, rows, col_seed))))
    return Table(columns)


# ---------------------------------------------------------------------------
# predicates


def _best_window(counts: np.ndarray, want: float, rng: np.random.Generator) -> tuple:
    """Contiguous window ``[i, j]`` whose count sum is closest to ``want``."""
    prefix = np.concatenate(([0], np.cumsum(counts)))
    starts = np.arange(len(counts))
    ends = np.searchsorted(prefix, prefix[starts] + want, side="left")
    best_err, best = math.inf, []
    for cand in (ends - 1, ends):
        j = np.clip(cand, starts + 1, len(counts))
        err = np.abs(prefix[j] - prefix[starts] - want)
        m = err.min()
        if m < best_err - 1e-9:
            best_err, best = m, []
        if abs(m - best_err) <= 1e-9:
            best.extend((int(i), int(jj) - 1) for i, jj in zip(starts[err <= m + 1e-9], j[err <= m + 1e-9]))
    i, j = best[int(rng.integers(len(best)))]
    return i, j, int(prefix[j + 1] - prefix[i])


def _py(value):
    return value.item() if hasattr(value, "item") else value


def generate_predicates(table: Table, target_selectivity: float, count: int, seed: int) -> list:
    """Range predicates whose realized selectivity is closest to the target.

    Each predicate starts from a random column; other columns are tried
    when it misses the target by more than 20% relative.  The realized
    selectivity is always recorded in ``achieved_selectivity``.
    """
    if not 0 < target_selectivity <= 1:
        raise InvalidConfig("target selectivity must lie in (0, 1]")
    rows = table.row_count
    if rows == 0:
        raise InvalidConfig("cannot draw predicates over an empty table")
    rng = np.random.default_rng(np.random.SeedSequence([seed & ((1 << 64) - 1), 0x9ED]))
    candidates = [name for name, col in table.columns if col.null_count < len(col)]
    if not candidates:
        raise InvalidConfig("every column is entirely null")
    cache = {}
    out = []
    want = target_selectivity * rows
    for _ in range(count):
        order = [candidates[i] for i in rng.permutation(len(candidates))]
        best = None
        for name in order:
            if name not in cache:
                cache[name] = np.unique(table.column(name).present(), return_counts=True)
            values, counts = cache[name]
            i, j, matched = _best_window(counts, want, rng)
            err = abs(matched - want) / want
            if best is None or err < best[0]:
                best = (err, name, values[i], values[j], matched)
            if err <= 0.2:
                break
        _, name, lo, hi, matched = best
        out.append(PredicateSpec.between(name, _py(lo), _py(hi), target_selectivity=target_selectivity,
                                         achieved_selectivity=matched / rows))
    return out
