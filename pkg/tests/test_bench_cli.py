"""Benchmark-matrix and command-line tests."""

import csv
import io
import subprocess
import sys
from pathlib import Path

import pytest

from pbsolve.bench import CSV_HEADER, run_matrix, write_cactus_csv, write_csv
from pbsolve.generators import php_instance, random_instance
from pbsolve.opb import write_opb


def write_instance(path: Path, instance) -> Path:
    with open(path, "w", encoding="ascii") as f:
        write_opb(instance, f)
    return path


@pytest.fixture
def bench_dir(tmp_path):
    d = tmp_path / "instances"
    d.mkdir()
    write_instance(d / "php-2-1.opb", php_instance(2, 1))
    write_instance(d / "php-3-2.opb", php_instance(3, 2))
    write_instance(d / "rand-a.opb", random_instance(6, 8, 5, 1))
    return d


def run_cli(*args):
    return subprocess.run(
        [sys.executable, "-m", "pbsolve", *map(str, args)],
        capture_output=True,
        text=True,
        timeout=300,
    )


class TestBenchMatrix:
    def test_row_cardinality_and_header(self, bench_dir, tmp_path):
        records = run_matrix(sorted(bench_dir.glob("*.opb"))[:2], ["gen-res", "rs-both"], 60)
        assert len(records) == 4
        buf = io.StringIO()
        write_csv(records, buf)
        lines = buf.getvalue().splitlines()
        assert lines[0] == CSV_HEADER
        assert len(lines) == 5

    def test_cactus_counts_are_nondecreasing(self, bench_dir):
        records = run_matrix(sorted(bench_dir.glob("*.opb")), ["gen-res", "partial-rs-both"], 60)
        buf = io.StringIO()
        write_cactus_csv(records, buf)
        rows = list(csv.DictReader(io.StringIO(buf.getvalue())))
        by_strategy: dict[str, list[int]] = {}
        for row in rows:
            by_strategy.setdefault(row["strategy"], []).append(int(row["solved"]))
        assert by_strategy
        for counts in by_strategy.values():
            assert counts == sorted(counts)
            assert counts[0] == 1

    def test_unreadable_file_becomes_unknown_row(self, tmp_path):
        bad = tmp_path / "broken.opb"
        bad.write_text("+1 x1 >= oops\n")
        records = run_matrix([bad], ["gen-res"], 10)
        assert records[0].status == "UNKNOWN"

    def test_parallel_jobs_match_serial(self, bench_dir, tmp_path):
        paths = sorted(bench_dir.glob("*.opb"))
        serial = run_matrix(paths, ["rs-both"], 60, jobs=1)
        parallel = run_matrix(paths, ["rs-both"], 60, jobs=2)
        strip = lambda rs: [(r.instance, r.strategy, r.status, r.conflicts) for r in rs]
        assert strip(serial) == strip(parallel)

    def test_watchdog_kills_stuck_worker(self, bench_dir, monkeypatch):
        import time as time_mod

        import pbsolve.bench as bench_mod

        def stuck(path, strategy, timeout, seed=0, trace_path=None):
            time_mod.sleep(3600)

        # Workers are forked, so they inherit the patched function.
        monkeypatch.setattr(bench_mod, "run_one", stuck)
        monkeypatch.setattr(bench_mod, "GRACE_SECONDS", 0.2)
        paths = sorted(bench_dir.glob("*.opb"))[:1]
        records = bench_mod.run_matrix(paths, ["gen-res"], timeout=0.1, jobs=2)
        assert len(records) == 1
        assert records[0].status == "UNKNOWN"


class TestCli:
    def test_solve_unsat_exit_code_and_output(self, tmp_path):
        path = write_instance(tmp_path / "php.opb", php_instance(3, 2))
        proc = run_cli("solve", path, "--strategy", "rs-both")
        assert proc.returncode == 20
        assert "s UNSATISFIABLE" in proc.stdout

    def test_solve_sat_prints_values(self, tmp_path):
        path = tmp_path / "one.opb"
        path.write_text("+1 x1 >= 1 ;\n")
        proc = run_cli("solve", path, "--verify-model")
        assert proc.returncode == 10
        assert "s SATISFIABLE" in proc.stdout
        assert "\nv x1" in proc.stdout

    def test_malformed_file_positioned_diagnostic(self, tmp_path):
        path = tmp_path / "bad.opb"
        path.write_text("+1 x1 x2 >= 1 ;\n")
        proc = run_cli("solve", path)
        assert proc.returncode == 1
        assert "line 1" in proc.stderr

    def test_missing_file(self, tmp_path):
        proc = run_cli("solve", tmp_path / "absent.opb")
        assert proc.returncode == 1

    def test_usage_error(self):
        proc = run_cli("solve")
        assert proc.returncode == 1

    def test_generate_php_counts(self, tmp_path):
        out = tmp_path / "php.opb"
        proc = run_cli("generate", "php", "--pigeons", "3", "--holes", "2", "--out", out)
        assert proc.returncode == 0
        header = out.read_text().splitlines()[0]
        assert header == "* #variable= 6 #constraint= 5"

    def test_generate_random_reproducible(self, tmp_path):
        a, b = tmp_path / "a.opb", tmp_path / "b.opb"
        for out in (a, b):
            proc = run_cli(
                "generate", "random", "--vars", "6", "--constraints", "9",
                "--max-weight", "7", "--seed", "5", "--out", out,
            )
            assert proc.returncode == 0
        assert a.read_bytes() == b.read_bytes()

    def test_generate_rejects_bad_parameters(self, tmp_path):
        proc = run_cli("generate", "php", "--pigeons", "0", "--holes", "2",
                       "--out", tmp_path / "x.opb")
        assert proc.returncode == 1

    def test_emit_trace_then_verify(self, tmp_path):
        path = write_instance(tmp_path / "php.opb", php_instance(3, 2))
        trace = tmp_path / "php.trace"
        proc = run_cli("solve", path, "--strategy", "gen-res", "--emit-trace", trace)
        assert proc.returncode == 20
        assert trace.exists()
        check = run_cli("verify", path, trace)
        assert check.returncode == 0
        assert "trace OK" in check.stdout

    def test_bench_csv_schema_and_determinism(self, bench_dir, tmp_path):
        outs = []
        for name in ("one.csv", "two.csv"):
            out = tmp_path / name
            proc = run_cli(
                "bench", bench_dir, "--strategies", "gen-res,rs-both",
                "--timeout", "60", "--jobs", "1", "--seed", "3", "--out", out,
            )
            assert proc.returncode == 0
            outs.append(out)
        first, second = (o.read_text().splitlines() for o in outs)
        assert first[0] == CSV_HEADER
        strip_seconds = lambda lines: [
            ",".join(v for i, v in enumerate(row.split(",")) if i != 3) for row in lines
        ]
        assert strip_seconds(first) == strip_seconds(second)
        assert (tmp_path / "one.cactus.csv").exists()
