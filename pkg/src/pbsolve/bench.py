"""The benchmark matrix runner: (instance x strategy) pairs to CSV.

Every pair runs in an isolated worker process with a cooperative time budget
plus a watchdog that terminates stragglers; a killed or crashed run becomes
an UNKNOWN row and never aborts the matrix.  Alongside the per-run CSV a
cactus CSV is written: for each strategy the cumulative solved count against
the per-run time, sorted ascending.
"""

from __future__ import annotations

import csv
import multiprocessing as mp
import queue as queue_mod
import time
from dataclasses import dataclass
from pathlib import Path
from typing import IO, Sequence

from .analysis import STRATEGY_IDS
from .opb import UNKNOWN, parse_opb
from .solver import SolverConfig, solve

CSV_HEADER = (
    "instance,strategy,status,seconds,conflicts,decisions,propagations,"
    "learned,max_coeff_bits,fallbacks"
)

#: Extra wall-clock seconds granted beyond the timeout before a worker is killed.
GRACE_SECONDS = 5.0


@dataclass
class BenchRecord:
    instance: str
    strategy: str
    status: str
    seconds: float
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    learned: int = 0
    max_coeff_bits: int = 0
    fallbacks: int = 0

    def row(self) -> list[str]:
        return [
            self.instance,
            self.strategy,
            self.status,
            f"{self.seconds:.3f}",
            str(self.conflicts),
            str(self.decisions),
            str(self.propagations),
            str(self.learned),
            str(self.max_coeff_bits),
            str(self.fallbacks),
        ]


def run_one(
    path: str | Path,
    strategy: str,
    timeout: float | None,
    seed: int = 0,
    trace_path: str | Path | None = None,
) -> BenchRecord:
    """Solve one file with one strategy; exceptions become an UNKNOWN record."""
    name = Path(path).name
    start = time.monotonic()
    try:
        with open(path, "r", encoding="ascii") as f:
            instance = parse_opb(f, name=name)
        config = SolverConfig(
            strategy=strategy,
            seed=seed,
            time_budget=timeout,
            emit_trace=trace_path is not None,
        )
        result = solve(instance, config)
        if trace_path is not None and result.trace is not None:
            result.trace.write_file(trace_path)
        st = result.stats
        return BenchRecord(
            name,
            strategy,
            result.status,
            st.seconds,
            st.conflicts,
            st.decisions,
            st.propagations,
            st.learned,
            st.max_coeff_bits,
            st.fallbacks,
        )
    except Exception:
        return BenchRecord(name, strategy, UNKNOWN, time.monotonic() - start)


def _worker(task, queue):
    index, path, strategy, timeout, seed, trace_path = task
    record = run_one(path, strategy, timeout, seed, trace_path)
    queue.put((index, record))


def run_matrix(
    paths: Sequence[str | Path],
    strategies: Sequence[str],
    timeout: float | None,
    jobs: int = 1,
    seed: int = 0,
    trace_dir: str | Path | None = None,
) -> list[BenchRecord]:
    """Run every (instance, strategy) pair; rows come back in matrix order."""
    for s in strategies:
        if s not in STRATEGY_IDS:
            raise ValueError(f"unknown strategy {s!r}")
    tasks = []
    for path in sorted(paths, key=lambda p: Path(p).name):
        for strategy in strategies:
            trace_path = None
            if trace_dir is not None:
                trace_path = Path(trace_dir) / f"{Path(path).stem}.{strategy}.trace"
            tasks.append((len(tasks), path, strategy, timeout, seed, trace_path))

    results: dict[int, BenchRecord] = {}
    if jobs <= 1:
        for task in tasks:
            results[task[0]] = run_one(*task[1:])
    else:
        queue: mp.Queue = mp.Queue()
        waiting = list(reversed(tasks))
        running: dict[int, tuple[mp.Process, float, tuple]] = {}
        while waiting or running:
            while waiting and len(running) < jobs:
                task = waiting.pop()
                proc = mp.Process(target=_worker, args=(task, queue), daemon=True)
                proc.start()
                running[task[0]] = (proc, time.monotonic(), task)
            try:
                index, record = queue.get(timeout=0.1)
                results[index] = record
                proc, _, _ = running.pop(index)
                proc.join()
            except (queue_mod.Empty, KeyError):
                pass
            now = time.monotonic()
            for index in list(running):
                proc, started, task = running[index]
                if not proc.is_alive() and index not in results:
                    # Crashed without reporting.
                    results[index] = BenchRecord(
                        Path(task[1]).name, task[2], UNKNOWN, now - started
                    )
                    running.pop(index)
                elif timeout is not None and now - started > timeout + GRACE_SECONDS:
                    proc.terminate()
                    proc.join()
                    results[index] = BenchRecord(
                        Path(task[1]).name, task[2], UNKNOWN, now - started
                    )
                    running.pop(index)
    return [results[i] for i in range(len(tasks))]


def write_csv(records: Sequence[BenchRecord], stream: IO[str]) -> None:
    stream.write(CSV_HEADER + "\n")
    writer = csv.writer(stream, lineterminator="\n")
    for record in records:
        writer.writerow(record.row())


def write_cactus_csv(records: Sequence[BenchRecord], stream: IO[str]) -> None:
    """Per strategy: cumulative solved count versus ascending solve time."""
    stream.write("strategy,solved,seconds\n")
    writer = csv.writer(stream, lineterminator="\n")
    strategies = sorted({r.strategy for r in records})
    for strategy in strategies:
        times = sorted(
            r.seconds for r in records if r.strategy == strategy and r.status != UNKNOWN
        )
        for count, seconds in enumerate(times, start=1):
            writer.writerow([strategy, str(count), f"{seconds:.3f}"])
