"""In-memory column containers and the per-column property statistics.

A :class:`ColumnVector` is a dense value array plus a validity bitmap.  Null
slots hold a type-specific placeholder so every array stays rectangular; the
statistics below never look at those placeholders.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Any, Iterable, Sequence

import numpy as np
import pandas as pd

from .errors import EmptyColumn, InvalidConfig, NotEnoughValues


class LogicalType(enum.IntEnum):
    Int64 = 0
    Float64 = 1
    Utf8String = 2
    Bool = 3


_DTYPES = {
    LogicalType.Int64: np.dtype(np.int64),
    LogicalType.Float64: np.dtype(np.float64),
    LogicalType.Utf8String: np.dtype(object),
    LogicalType.Bool: np.dtype(np.bool_),
}

PLACEHOLDERS = {
    LogicalType.Int64: 0,
    LogicalType.Float64: 0.0,
    LogicalType.Utf8String: "",
    LogicalType.Bool: False,
}


def dtype_for(logical_type: LogicalType) -> np.dtype:
    return _DTYPES[logical_type]


@dataclass(frozen=True, eq=False)
class ColumnVector:
    logical_type: LogicalType
    values: np.ndarray
    validity: np.ndarray

    def __post_init__(self):
        values = np.asarray(self.values, dtype=_DTYPES[self.logical_type])
        validity = np.asarray(self.validity, dtype=np.bool_)
        if values.ndim != 1 or validity.shape != values.shape:
            raise InvalidConfig("values and validity must be 1-d arrays of equal length")
        if not validity.all():
            # placeholders keep null slots deterministic
            values = values.copy()
            values[~validity] = PLACEHOLDERS[self.logical_type]
        object.__setattr__(self, "values", values)
        object.__setattr__(self, "validity", validity)

    @classmethod
    def from_values(cls, logical_type: LogicalType, items: Iterable[Any]) -> "ColumnVector":
        """Build a column from Python values, ``None`` marking a null."""
        items = list(items)
        validity = np.array([v is not None for v in items], dtype=np.bool_)
        filler = PLACEHOLDERS[logical_type]
        values = np.empty(len(items), dtype=_DTYPES[logical_type])
        values[:] = [filler if v is None else v for v in items] if items else []
        return cls(logical_type, values, validity)

    @classmethod
    def dense(cls, logical_type: LogicalType, values) -> "ColumnVector":
        values = np.asarray(values, dtype=_DTYPES[logical_type])
        return cls(logical_type, values, np.ones(len(values), dtype=np.bool_))

    def __len__(self) -> int:
        return len(self.values)

    @property
    def length(self) -> int:
        return len(self.values)

    @property
    def null_count(self) -> int:
        return int(len(self.validity) - np.count_nonzero(self.validity))

    def present(self) -> np.ndarray:
        """Present values only, in row order."""
        if self.null_count == 0:
            return self.values
        return self.values[self.validity]

    def to_list(self) -> list:
        return [v if ok else None for v, ok in zip(self.values.tolist(), self.validity.tolist())]

    def take(self, indices) -> "ColumnVector":
        return ColumnVector(self.logical_type, self.values[indices], self.validity[indices])

    def slice(self, start: int, stop: int) -> "ColumnVector":
        return ColumnVector(self.logical_type, self.values[start:stop], self.validity[start:stop])

    def equals(self, other: "ColumnVector") -> bool:
        """Exact equality; floats compare by bit pattern so NaN round trips count."""
        if self.logical_type != other.logical_type or len(self) != len(other):
            return False
        if not np.array_equal(self.validity, other.validity):
            return False
        a, b = self.values, other.values
        if self.logical_type is LogicalType.Float64:
            return bool(np.array_equal(a.view(np.int64), b.view(np.int64)))
        if self.logical_type is LogicalType.Utf8String:
            return a.tolist() == b.tolist()
        return bool(np.array_equal(a, b))

    def __eq__(self, other):
        if not isinstance(other, ColumnVector):
            return NotImplemented
        return self.equals(other)

    def __repr__(self):
        head = self.to_list()[:6]
        more = "..." if len(self) > 6 else ""
        return f"ColumnVector({self.logical_type.name}, {head}{more}, length={len(self)})"


def concat_columns(parts: Sequence[ColumnVector], logical_type: LogicalType) -> ColumnVector:
    if not parts:
        return ColumnVector(logical_type, np.empty(0, dtype=_DTYPES[logical_type]),
                            np.empty(0, dtype=np.bool_))
    if len(parts) == 1:
        return parts[0]
    return ColumnVector(logical_type,
                        np.concatenate([p.values for p in parts]),
                        np.concatenate([p.validity for p in parts]))


@dataclass(eq=False)
class Table:
    columns: list = field(default_factory=list)  # list of (name, ColumnVector)

    def __post_init__(self):
        names = [n for n, _ in self.columns]
        if len(set(names)) != len(names):
            raise InvalidConfig("column names must be unique")
        lengths = {len(c) for _, c in self.columns}
        if len(lengths) > 1:
            raise InvalidConfig(f"columns have different lengths: {sorted(lengths)}")

    @property
    def row_count(self) -> int:
        return len(self.columns[0][1]) if self.columns else 0

    @property
    def names(self) -> list:
        return [n for n, _ in self.columns]

    @property
    def schema(self) -> list:
        return [(n, c.logical_type) for n, c in self.columns]

    def column(self, name: str) -> ColumnVector:
        for n, c in self.columns:
            if n == name:
                return c
        raise KeyError(name)

    def __getitem__(self, name: str) -> ColumnVector:
        return self.column(name)

    def select(self, names: Sequence[str]) -> "Table":
        return Table([(n, self.column(n)) for n in names])

    def take(self, indices) -> "Table":
        return Table([(n, c.take(indices)) for n, c in self.columns])

    def slice(self, start: int, stop: int) -> "Table":
        return Table([(n, c.slice(start, stop)) for n, c in self.columns])

    def equals(self, other: "Table") -> bool:
        if self.schema != other.schema or self.row_count != other.row_count:
            return False
        return all(a.equals(b) for (_, a), (_, b) in zip(self.columns, other.columns))

    def __eq__(self, other):
        if not isinstance(other, Table):
            return NotImplemented
        return self.equals(other)

    def __repr__(self):
        cols = ", ".join(f"{n}:{c.logical_type.name}" for n, c in self.columns)
        return f"Table(rows={self.row_count}, [{cols}])"


# ---------------------------------------------------------------------------
# statistics


class SkewCategory(enum.Enum):
    Uniform = "Uniform"
    GentleZipf = "GentleZipf"
    Hotspot = "Hotspot"
    SingleBinary = "SingleBinary"


@dataclass(frozen=True)
class ColumnStats:
    ndv: int
    ndv_ratio: float
    null_ratio: float
    min: Any
    max: Any
    sortedness: float | None
    skew_category: SkewCategory | None
    fitted_zipf_s: float | None


def _identity_keys(values: np.ndarray, logical_type: LogicalType) -> np.ndarray:
    # floats are compared by bit pattern: NaN == NaN, -0.0 != 0.0
    if logical_type is LogicalType.Float64:
        return values.view(np.int64)
    return values


def distinct_counts(col: ColumnVector) -> np.ndarray:
    """Occurrence count of every distinct present value (unordered)."""
    keys = _identity_keys(col.present(), col.logical_type)
    if len(keys) == 0:
        return np.empty(0, dtype=np.int64)
    if keys.dtype == object:
        return pd.Series(keys).value_counts(sort=False).to_numpy()
    return np.unique(keys, return_counts=True)[1]


def compute_ndv(col: ColumnVector) -> int:
    keys = _identity_keys(col.present(), col.logical_type)
    if len(keys) == 0:
        return 0
    if keys.dtype == object:
        return len(pd.unique(keys))
    return len(np.unique(keys))


def compute_ndv_ratio(col: ColumnVector) -> float:
    if len(col) == 0:
        raise EmptyColumn("NDV ratio of an empty column")
    return compute_ndv(col) / len(col)


def compute_null_ratio(col: ColumnVector) -> float:
    if len(col) == 0:
        raise EmptyColumn("null ratio of an empty column")
    return col.null_count / len(col)


def block_sortedness_scores(values: np.ndarray, block_size: int = 512) -> np.ndarray:
    """Per-block sortedness scores of a dense value sequence.

    Blocks shorter than two values are dropped.  Each score is clamped to
    [0, 1]; a two-value block scores 1 since its formula degenerates to 0/0.
    """
    n = len(values)
    if block_size < 2:
        raise InvalidConfig("block_size must be at least 2")
    nblocks = -(-n // block_size)
    if n < 2:
        return np.empty(0)
    left, right = values[:-1], values[1:]
    asc = np.asarray(left < right, dtype=np.int64)
    desc = np.asarray(left > right, dtype=np.int64)
    eq = np.asarray(left == right, dtype=np.int64)
    pos = np.arange(n - 1)
    inner = (pos % block_size) != block_size - 1
    block = pos // block_size
    asc_b = np.bincount(block[inner], weights=asc[inner], minlength=nblocks)
    desc_b = np.bincount(block[inner], weights=desc[inner], minlength=nblocks)
    eq_b = np.bincount(block[inner], weights=eq[inner], minlength=nblocks)
    lengths = np.full(nblocks, block_size)
    lengths[-1] = n - (nblocks - 1) * block_size
    keep = lengths >= 2
    lengths, asc_b, desc_b, eq_b = lengths[keep], asc_b[keep], desc_b[keep], eq_b[keep]
    numer = np.maximum(asc_b, desc_b) + eq_b - lengths // 2
    denom = (lengths + 1) // 2 - 1
    with np.errstate(divide="ignore", invalid="ignore"):
        scores = np.where(denom > 0, numer / np.maximum(denom, 1), 1.0)
    return np.clip(scores, 0.0, 1.0)


def compute_sortedness(col: ColumnVector, block_size: int = 512) -> float:
    values = col.present()
    if len(values) < 2:
        raise NotEnoughValues("sortedness needs at least two present values")
    return float(block_sortedness_scores(values, block_size).mean())


ZIPF_GRID = np.round(np.arange(0, 401) * 0.01, 2)
_FIT_HEAD = 4096


def _zipf_norms(count: int, grid: np.ndarray) -> np.ndarray:
    """Sum_{n=1..count} n**-s for every s in grid.

    Exact for the first ``_FIT_HEAD`` terms, midpoint-rule integral beyond.
    """
    head = min(count, _FIT_HEAD)
    ranks = np.arange(1, head + 1, dtype=np.float64)
    sums = np.power(ranks[None, :], -grid[:, None]).sum(axis=1)
    if count > head:
        a, b = head + 0.5, count + 0.5
        tail = np.empty_like(grid)
        near_one = np.abs(grid - 1.0) < 1e-9
        tail[near_one] = math.log(b / a)
        s = grid[~near_one]
        tail[~near_one] = (b ** (1 - s) - a ** (1 - s)) / (1 - s)
        sums = sums + tail
    return sums


def fit_zipf_s(frequencies: np.ndarray) -> float:
    """Grid-search the Zipf exponent that best matches rank frequencies.

    ``frequencies`` are occurrence counts of the distinct values in any
    order.  The squared error is taken over the leading ranks, where nearly
    all of the probability mass and error lives.
    """
    counts = np.sort(np.asarray(frequencies, dtype=np.float64))[::-1]
    total = counts.sum()
    if total <= 0:
        raise NotEnoughValues("no values to fit")
    c = len(counts)
    head = min(c, _FIT_HEAD)
    empirical = counts[:head] / total
    ranks = np.arange(1, head + 1, dtype=np.float64)
    model = np.power(ranks[None, :], -ZIPF_GRID[:, None]) / _zipf_norms(c, ZIPF_GRID)[:, None]
    sse = ((model - empirical[None, :]) ** 2).sum(axis=1)
    return float(ZIPF_GRID[int(np.argmin(sse))])


def skew_category_for(s: float, ndv: int) -> SkewCategory:
    if ndv <= 2:
        return SkewCategory.SingleBinary
    if s <= 0.01:
        return SkewCategory.Uniform
    if s <= 2:
        return SkewCategory.GentleZipf
    return SkewCategory.Hotspot


def classify_skew(col: ColumnVector) -> tuple:
    counts = distinct_counts(col)
    if len(counts) == 0:
        raise NotEnoughValues("skew of an all-null column")
    s = fit_zipf_s(counts) if len(counts) > 1 else 0.0
    return s, skew_category_for(s, len(counts))


def _min_max(col: ColumnVector):
    values = col.present()
    if len(values) == 0:
        return None, None
    if col.logical_type is LogicalType.Float64:
        finite = values[~np.isnan(values)]
        if len(finite) == 0:
            return None, None
        return float(finite.min()), float(finite.max())
    if col.logical_type is LogicalType.Utf8String:
        return min(values), max(values)
    if col.logical_type is LogicalType.Bool:
        return bool(values.min()), bool(values.max())
    return int(values.min()), int(values.max())


def compute_stats(col: ColumnVector, block_size: int = 512) -> ColumnStats:
    if len(col) == 0:
        raise EmptyColumn("stats of an empty column")
    ndv = compute_ndv(col)
    lo, hi = _min_max(col)
    present = col.length - col.null_count
    sortedness = compute_sortedness(col, block_size) if present >= 2 else None
    if present:
        s, category = classify_skew(col)
    else:
        s, category = None, None
    return ColumnStats(
        ndv=ndv,
        ndv_ratio=ndv / len(col),
        null_ratio=compute_null_ratio(col),
        min=lo,
        max=hi,
        sortedness=sortedness,
        skew_category=category,
        fitted_zipf_s=s,
    )
