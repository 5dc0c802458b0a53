import sys

import numpy as np
import pytest
from hypothesis import HealthCheck, settings

from paxlab.column import ColumnVector, LogicalType, Table

settings.register_profile(
    "default", max_examples=60, deadline=None, suppress_health_check=[HealthCheck.too_slow],
)
settings.load_profile("default")


def make_table(n: int, seed: int = 0, nulls: bool = True) -> Table:
    """Small mixed-type table with nulls in every column."""
    rng = np.random.default_rng(seed)

    def validity():
        return rng.random(n) > 0.1 if nulls else np.ones(n, dtype=bool)

    ints = ColumnVector(LogicalType.Int64, rng.integers(-500, 500, n), validity())
    floats = ColumnVector(LogicalType.Float64, rng.integers(0, 300, n) / 4, validity())
    words = np.array([f"w{v}" for v in rng.integers(0, 50, n)], dtype=object)
    strings = ColumnVector(LogicalType.Utf8String, words, validity())
    bools = ColumnVector(LogicalType.Bool, rng.random(n) > 0.5, validity())
    return Table([("i", ints), ("f", floats), ("s", strings), ("b", bools)])


@pytest.fixture
def mixed_table():
    return make_table(5000)


def pytest_terminal_summary(terminalreporter):
    acceptance = sys.modules.get("test_acceptance")
    results = getattr(acceptance, "RESULTS", None)
    if not results:
        return
    terminalreporter.section("acceptance criteria")
    for number in sorted(results):
        status, title, note = results[number]
        terminalreporter.write_line(f"C{number} {status}: {title}" + (f" ({note})" if note else ""))
