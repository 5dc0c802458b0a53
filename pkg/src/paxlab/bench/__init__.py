"""Benchmark harness and command line."""

from .cli import main
from .suites import SUITES, BenchOptions, BenchRecord, run_suite

__all__ = ["SUITES", "BenchOptions", "BenchRecord", "main", "run_suite"]
