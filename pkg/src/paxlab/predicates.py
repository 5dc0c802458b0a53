from __future__ import annotations

import enum
from dataclasses import dataclass
from typing import Any

import numpy as np

from .column import ColumnVector, LogicalType
from .errors import InvalidConfig, TypeMismatch


class PredicateOp(enum.Enum):
    Eq = "eq"
    RangeInclusive = "range"


@dataclass(frozen=True)
class PredicateSpec:
    column_name: str
    op: PredicateOp
    literals: tuple
    target_selectivity: float | None = None
    achieved_selectivity: float | None = None

    def __post_init__(self):
        need = 1 if self.op is PredicateOp.Eq else 2
        if len(self.literals) != need:
            raise InvalidConfig(f"{self.op.name} takes {need} literal(s)")
        if self.op is PredicateOp.RangeInclusive and self.literals[0] > self.literals[1]:
            raise InvalidConfig("range predicate needs lo <= hi")

    @classmethod
    def eq(cls, column: str, value: Any, **kw) -> "PredicateSpec":
        return cls(column, PredicateOp.Eq, (value,), **kw)

    @classmethod
    def between(cls, column: str, lo: Any, hi: Any, **kw) -> "PredicateSpec":
        return cls(column, PredicateOp.RangeInclusive, (lo, hi), **kw)

    @property
    def bounds(self) -> tuple:
        if self.op is PredicateOp.Eq:
            return self.literals[0], self.literals[0]
        return self.literals[0], self.literals[1]


def _check_literal(value, logical_type: LogicalType):
    ok = {
        LogicalType.Int64: isinstance(value, (int, np.integer)) and not isinstance(value, (bool, np.bool_)),
        LogicalType.Float64: isinstance(value, (int, float, np.integer, np.floating))
        and not isinstance(value, (bool, np.bool_)),
        LogicalType.Utf8String: isinstance(value, str),
        LogicalType.Bool: isinstance(value, (bool, np.bool_)),
    }[logical_type]
    if not ok:
        raise TypeMismatch(f"literal {value!r} does not match column type {logical_type.name}")


def check_predicate_type(pred: PredicateSpec, logical_type: LogicalType) -> None:
    for lit in pred.literals:
        _check_literal(lit, logical_type)


def evaluate(pred: PredicateSpec, col: ColumnVector) -> np.ndarray:
    """Boolean match mask; nulls never match."""
    check_predicate_type(pred, col.logical_type)
    lo, hi = pred.bounds
    values = col.values
    if pred.op is PredicateOp.Eq:
        mask = values == lo
    else:
        mask = (values >= lo) & (values <= hi)
    return np.asarray(mask, dtype=np.bool_) & col.validity
