import csv
import io
import json

import pytest

from paxlab.bench.cli import EXIT_CONFIG, EXIT_IO, EXIT_OK, main, read_csv_table
from paxlab.bench.suites import SUITES, BenchRecord
from paxlab.column import LogicalType
from paxlab.errors import InvalidConfig
from paxlab.paxfile import PaxReader, read_footer, scan_table
from paxlab.workload import column_plan, derive_column_config, workload_preset


def run(*argv):
    out, err = io.StringIO(), io.StringIO()
    code = main([str(a) for a in argv], stdout=out, stderr=err)
    return code, list(csv.DictReader(io.StringIO(out.getvalue()))), err.getvalue()


class TestGenerate:
    def test_writes_file(self, tmp_path):
        path = tmp_path / "f.paxb"
        code, rows, _ = run("generate", "--workload", "core", "--rows", 20_000, "--cols", 20,
                            "--preset", "parquet-like", "--out", path)
        assert code == EXIT_OK
        assert int(rows[0]["file_bytes"]) == path.stat().st_size
        assert scan_table(str(path)).row_count == 20_000

    def test_unknown_workload(self, tmp_path):
        code, _, err = run("generate", "--workload", "tpch", "--rows", 10, "--out", tmp_path / "x.paxb")
        assert code == EXIT_CONFIG and "tpch" in err

    def test_zero_rows_has_footer(self, tmp_path):
        path = tmp_path / "empty.paxb"
        code, rows, _ = run("generate", "--rows", 0, "--cols", 3, "--out", path)
        assert code == EXIT_OK and int(rows[0]["file_bytes"]) > 0
        assert read_footer(str(path)).total_rows == 0

    def test_unwritable_destination(self, tmp_path):
        code, _, _ = run("generate", "--rows", 10, "--cols", 2, "--out", tmp_path / "missing" / "f.paxb")
        assert code == EXIT_IO

    def test_config_overrides(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text(json.dumps({"page_rows": 100}))
        path = tmp_path / "f.paxb"
        code, _, _ = run("generate", "--rows", 1000, "--cols", 1, "--config", cfg, "--out", path)
        assert code == EXIT_OK
        with PaxReader(str(path)) as reader:
            assert len(reader.meta(0, 0).pages) == 10

    def test_bad_config(self, tmp_path):
        cfg = tmp_path / "cfg.json"
        cfg.write_text("{not json")
        code, _, _ = run("generate", "--rows", 10, "--config", cfg, "--out", tmp_path / "f.paxb")
        assert code == EXIT_CONFIG


class TestAnalyze:
    def test_constant_column(self, tmp_path):
        path = tmp_path / "c.csv"
        path.write_text("1\n1\n1\n")
        code, rows, _ = run("analyze", "--input", path)
        assert code == EXIT_OK
        assert float(rows[0]["ndv_ratio"]) == pytest.approx(1 / 3, abs=1e-6)
        assert rows[0]["skew_category"] == "SingleBinary"

    def test_empty_csv(self, tmp_path):
        path = tmp_path / "e.csv"
        path.write_text("")
        assert run("analyze", "--input", path)[0] == EXIT_CONFIG

    def test_missing_input(self, tmp_path):
        assert run("analyze", "--input", tmp_path / "nope.csv")[0] == EXIT_IO

    def test_header_detection(self):
        table = read_csv_table("id,name,score\n1,a,2.5\n2,b,\n")
        assert table.names == ["id", "name", "score"]
        assert [c.logical_type for _, c in table.columns] == [LogicalType.Int64, LogicalType.Utf8String,
                                                            LogicalType.Float64]
        assert table.column("score").null_count == 1

    def test_headerless(self):
        table = read_csv_table("1,2\n3,4\n")
        assert table.names == ["c0", "c1"] and table.row_count == 2

    def test_unparseable_rows(self):
        with pytest.raises(InvalidConfig):
            read_csv_table("only,a,header\n", header=True)

    def test_generated_core_matches_plan(self, tmp_path):
        # core columns draw their levels from a component preset, so each column
        # is checked against the levels it was generated from
        path = tmp_path / "core.paxb"
        rows = 50_000
        assert run("generate", "--rows", rows, "--cols", 20, "--seed", 3, "--out", path)[0] == EXIT_OK
        code, analyzed, _ = run("analyze", "--input", path)
        assert code == EXIT_OK and len(analyzed) == 20
        for row, (name, source, lt, seed) in zip(analyzed, column_plan(workload_preset("core"), rows, 20, 3)):
            cfg = derive_column_config(workload_preset(source), lt, rows, seed)
            assert row["column"] == name and row["logical_type"] == lt.name
            ndv_target = cfg.distinct_target / rows
            assert abs(float(row["ndv_ratio"]) - ndv_target) <= 0.10 * ndv_target
            assert abs(float(row["null_ratio"]) - cfg.null_ratio) <= 0.01
            assert abs(float(row["sortedness"]) - cfg.sortedness_target) <= 0.05


class TestBench:
    @pytest.mark.parametrize("suite", SUITES)
    def test_suite_smoke(self, suite, tmp_path):
        out = tmp_path / f"{suite}.csv"
        rows = 300 if suite == "nested" else 20_000
        code, _, err = run("bench", "--suite", suite, "--rows", rows, "--out", out)
        assert code == EXIT_OK, err
        with open(out, newline="") as fh:
            reader = csv.DictReader(fh)
            records = list(reader)
        assert reader.fieldnames == BenchRecord.fieldnames()
        assert records and all(int(r["file_bytes"]) > 0 for r in records if r["file_bytes"])

    def test_counters_reproducible(self):
        args = ("bench", "--suite", "select", "--rows", 20_000, "--seed", 5)
        counters = ["file_bytes", "selectivity", "zones_skipped", "pages_decoded", "bytes_read", "read_ops"]
        first, second = run(*args)[1], run(*args)[1]
        assert [[r[k] for k in counters] for r in first] == [[r[k] for k in counters] for r in second]

    def test_unknown_preset(self):
        assert run("bench", "--suite", "scan", "--preset", "arrow", "--rows", 100)[0] == EXIT_CONFIG

    def test_reps_floor(self):
        assert run("bench", "--suite", "scan", "--reps", 1, "--rows", 100)[0] == EXIT_CONFIG

    def test_unknown_suite(self):
        assert run("bench", "--suite", "tpch")[0] == 2
