"""``paxlab`` command line: generate, analyze and bench.

Exit codes: 0 on success, 2 for invalid configuration or unparseable
input, 3 for I/O errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

import numpy as np

from ..codecs import CodecId
from ..column import ColumnVector, LogicalType, Table, compute_stats
from ..errors import InvalidConfig, PaxError
from ..paxfile import MAGIC, FormatPreset, scan_table, write_table
from ..workload import WORKLOAD_NAMES, generate_table, workload_preset
from .suites import SUITES, BenchOptions, BenchRecord, run_suite

EXIT_OK, EXIT_CONFIG, EXIT_IO = 0, 2, 3

ANALYZE_FIELDS = ["column", "logical_type", "rows", "ndv_ratio", "null_ratio", "sortedness", "fitted_zipf_s",
                  "skew_category", "min", "max", "mean_byte_length"]


def _load_overrides(path: str | None) -> dict | None:
    if path is None:
        return None
    with open(path, encoding="utf-8") as fh:
        try:
            overrides = json.load(fh)
        except json.JSONDecodeError as exc:
            raise InvalidConfig(f"config JSON does not parse: {exc}") from exc
    if not isinstance(overrides, dict):
        raise InvalidConfig("config JSON must be an object")
    return overrides


def _layout(preset: str, codec: str, config_path: str | None):
    cfg = FormatPreset.parse(preset).config(CodecId.parse(codec))
    overrides = _load_overrides(config_path)
    return cfg.with_overrides(overrides) if overrides else cfg


def _write_csv(rows: list, fields: list, out_path: str | None, stdout) -> None:
    if out_path is None:
        writer = csv.DictWriter(stdout, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        return
    with open(out_path, "w", newline="", encoding="utf-8") as fh:
        writer = csv.DictWriter(fh, fieldnames=fields, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)


# ---------------------------------------------------------------------------
# generate


def cmd_generate(args, stdout) -> int:
    if args.workload not in WORKLOAD_NAMES:
        raise InvalidConfig(f"unknown workload {args.workload!r}; choose from {list(WORKLOAD_NAMES)}")
    if args.rows < 0 or args.cols < 1:
        raise InvalidConfig("rows must be >= 0 and cols >= 1")
    cfg = _layout(args.preset, args.codec, args.config)
    table = generate_table(workload_preset(args.workload), args.rows, args.cols, args.seed)
    start = time.perf_counter_ns()
    write_table(table, cfg, args.out)
    write_ns = time.perf_counter_ns() - start
    with open(args.out, "rb") as fh:
        file_bytes = len(fh.read())
    _write_csv([{"file_bytes": file_bytes, "write_ns": write_ns}], ["file_bytes", "write_ns"], None, stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# analyze


def _sniff_type(cells: list) -> LogicalType:
    present = [c for c in cells if c != ""]
    for lt, conv in ((LogicalType.Int64, int), (LogicalType.Float64, float)):
        try:
            for c in present:
                conv(c)
        except ValueError:
            continue
        if present or lt is LogicalType.Int64:
            return lt
    return LogicalType.Utf8String


def _is_number(cell: str) -> bool:
    try:
        float(cell)
    except ValueError:
        return False
    return True


def read_csv_table(text: str, header: bool | None = None) -> Table:
    """Parse CSV into a table, typing columns int -> float -> string.

    With ``header=None`` the first row is taken as a header when some cell
    in it is non-numeric while every later cell of that column is numeric.
    Empty cells are nulls.
    """
    rows = [r for r in csv.reader(io.StringIO(text)) if r]
    if not rows:
        raise InvalidConfig("CSV input is empty")
    width = max(len(r) for r in rows)
    rows = [r + [""] * (width - len(r)) for r in rows]
    if header is None:
        header = len(rows) > 1 and any(
            not _is_number(rows[0][j]) and all(_is_number(r[j]) for r in rows[1:] if r[j] != "")
            and any(r[j] != "" for r in rows[1:])
            for j in range(width))
    names = [n.strip() or f"c{j}" for j, n in enumerate(rows[0])] if header else [f"c{j}" for j in range(width)]
    body = rows[1:] if header else rows
    if not body:
        raise InvalidConfig("CSV input has no data rows")
    columns = []
    for j, name in enumerate(names):
        cells = [r[j].strip() for r in body]
        lt = _sniff_type(cells)
        conv = {LogicalType.Int64: int, LogicalType.Float64: float, LogicalType.Utf8String: str}[lt]
        columns.append((name, ColumnVector.from_values(lt, [None if c == "" else conv(c) for c in cells])))
    return Table(columns)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(round(value, 6))
    return value


def analyze_table(table: Table) -> list:
    out = []
    for name, col in table.columns:
        st = compute_stats(col)
        mean_len = ""
        if col.logical_type is LogicalType.Utf8String:
            present = col.present()
            mean_len = float(np.mean([len(s.encode("utf-8")) for s in present])) if len(present) else 0.0
        out.append({
            "column": name, "logical_type": col.logical_type.name, "rows": len(col),
            "ndv_ratio": _fmt(st.ndv_ratio), "null_ratio": _fmt(st.null_ratio),
            "sortedness": _fmt(st.sortedness), "fitted_zipf_s": _fmt(st.fitted_zipf_s),
            "skew_category": st.skew_category.value if st.skew_category else "",
            "min": _fmt(st.min), "max": _fmt(st.max), "mean_byte_length": _fmt(mean_len),
        })
    return out


def load_for_analysis(path: str) -> Table:
    with open(path, "rb") as fh:
        head = fh.read(len(MAGIC))
    if head == MAGIC:
        return scan_table(path)
    with open(path, encoding="utf-8") as fh:
        try:
            text = fh.read()
        except UnicodeDecodeError as exc:
            raise InvalidConfig(f"input is neither a pax file nor UTF-8 CSV: {exc}") from exc
    return read_csv_table(text)


def cmd_analyze(args, stdout) -> int:
    table = load_for_analysis(args.input)
    if table.row_count == 0:
        raise InvalidConfig("input has no rows to analyze")
    _write_csv(analyze_table(table), ANALYZE_FIELDS, args.out, stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------
# bench


def cmd_bench(args, stdout) -> int:
    presets = tuple(FormatPreset.parse(p) for p in (args.preset or ["parquet-like", "orc-like"]))
    default_codecs = ["none", "lz"] if args.suite == "scan" else ["none"]
    codecs = tuple(CodecId.parse(c) for c in (args.codec or default_codecs))
    opts = BenchOptions(presets, codecs, args.seed, args.rows, args.reps, _load_overrides(args.config))
    if opts.overrides:
        for p in presets:
            opts.layout(p, codecs[0])
    records = run_suite(args.suite, opts)
    _write_csv([r.as_row() for r in records], BenchRecord.fieldnames(), args.out, stdout)
    return EXIT_OK


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="paxlab", description="PAX columnar storage lab")
    sub = parser.add_subparsers(dest="command", required=True)

    g = sub.add_parser("generate", help="generate a workload table and write it as a pax file")
    g.add_argument("--workload", default="core", help=f"one of {', '.join(WORKLOAD_NAMES)}")
    g.add_argument("--rows", type=int, default=1_000_000)
    g.add_argument("--cols", type=int, default=20)
    g.add_argument("--seed", type=int, default=0)
    g.add_argument("--preset", default="parquet-like")
    g.add_argument("--codec", default="none")
    g.add_argument("--config", help="JSON file overriding layout fields of the preset")
    g.add_argument("--out", required=True)
    g.set_defaults(func=cmd_generate)

    a = sub.add_parser("analyze", help="per-column property report of a CSV or pax file")
    a.add_argument("--input", required=True)
    a.add_argument("--out", help="CSV destination (default stdout)")
    a.set_defaults(func=cmd_analyze)

    b = sub.add_parser("bench", help="run an experiment sweep and emit CSV")
    b.add_argument("--suite", required=True, choices=SUITES)
    b.add_argument("--preset", action="append", help="repeatable; default parquet-like and orc-like")
    b.add_argument("--codec", action="append", help="repeatable; default none (none and lz for scan)")
    b.add_argument("--seed", type=int, default=0)
    b.add_argument("--rows", type=int, help="override the suite's default row (or record) count")
    b.add_argument("--reps", type=int, default=3, help="timing repetitions, at least 3")
    b.add_argument("--config", help="JSON file overriding layout fields of every preset")
    b.add_argument("--out", help="CSV destination (default stdout)")
    b.set_defaults(func=cmd_bench)
    return parser


def main(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return args.func(args, stdout)
    except (InvalidConfig, PaxError) as exc:
        print(f"paxlab {args.command}: {exc}", file=stderr)
        return EXIT_CONFIG
    except OSError as exc:
        print(f"paxlab {args.command}: {exc}", file=stderr)
        return EXIT_IO


if __name__ == "__main__":
    sys.exit(main())
