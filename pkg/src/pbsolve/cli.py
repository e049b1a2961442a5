"""Command-line front end.

Subcommands: ``solve`` one OPB file, ``bench`` a directory as an
(instance x strategy) matrix with CSV output, ``generate`` pigeonhole or
random instances, and ``verify`` a derivation trace against its instance.
Solve exit codes follow the competition convention: 10 satisfiable,
20 unsatisfiable, 0 unknown, 1 usage or input errors.
"""

from __future__ import annotations

import argparse
import sys
from pathlib import Path

from .analysis import STRATEGY_IDS
from .bench import run_matrix, write_cactus_csv, write_csv
from .generators import php_instance, random_instance
from .opb import (
    OpbSyntaxError,
    SAT,
    UNKNOWN,
    UNSAT,
    format_solution,
    parse_opb,
    write_opb,
)
from .solver import SolverConfig, solve
from .trace import verify_trace

EXIT_SAT = 10
EXIT_UNSAT = 20
EXIT_UNKNOWN = 0
EXIT_ERROR = 1


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="pbsolve",
        description="Pseudo-Boolean CDCL solver with selectable conflict-analysis strategies.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    p_solve = sub.add_parser("solve", help="solve a single OPB file")
    p_solve.add_argument("file", type=Path)
    p_solve.add_argument("--strategy", default="partial-rs-both", choices=STRATEGY_IDS)
    p_solve.add_argument("--timeout", type=float, default=None, metavar="SECS")
    p_solve.add_argument("--seed", type=int, default=0, metavar="N")
    p_solve.add_argument("--verify-model", action="store_true",
                         help="re-check the model against the input before printing")
    p_solve.add_argument("--emit-trace", type=Path, default=None, metavar="PATH",
                         help="write the derivation trace to a sidecar file")
    p_solve.add_argument("--ignore-objective", action="store_true",
                         help="drop an objective line instead of rejecting it")

    p_bench = sub.add_parser("bench", help="run an instance x strategy matrix")
    p_bench.add_argument("dir", type=Path)
    p_bench.add_argument("--strategies", default=",".join(STRATEGY_IDS),
                         help="comma-separated strategy ids (default: all)")
    p_bench.add_argument("--timeout", type=float, default=1200.0, metavar="SECS")
    p_bench.add_argument("--jobs", type=int, default=1, metavar="J")
    p_bench.add_argument("--seed", type=int, default=0, metavar="N")
    p_bench.add_argument("--out", type=Path, required=True, metavar="CSV")
    p_bench.add_argument("--cactus", type=Path, default=None, metavar="CSV",
                         help="cactus CSV path (default: <out>.cactus.csv)")
    p_bench.add_argument("--trace-dir", type=Path, default=None,
                         help="emit a derivation trace per run into this directory")

    p_gen = sub.add_parser("generate", help="generate instance files")
    gen_sub = p_gen.add_subparsers(dest="family", required=True)
    g_php = gen_sub.add_parser("php", help="pigeonhole principle instance")
    g_php.add_argument("--pigeons", type=int, required=True)
    g_php.add_argument("--holes", type=int, required=True)
    g_php.add_argument("--out", type=Path, required=True)
    g_rand = gen_sub.add_parser("random", help="seeded random instance")
    g_rand.add_argument("--vars", type=int, required=True)
    g_rand.add_argument("--constraints", type=int, required=True)
    g_rand.add_argument("--max-weight", type=int, default=10)
    g_rand.add_argument("--seed", type=int, default=0)
    g_rand.add_argument("--out", type=Path, required=True)

    p_verify = sub.add_parser("verify", help="replay-check a derivation trace")
    p_verify.add_argument("file", type=Path, help="the OPB instance")
    p_verify.add_argument("trace", type=Path, help="the trace emitted by solve")
    return parser


def _cmd_solve(args) -> int:
    try:
        with open(args.file, "r", encoding="ascii") as f:
            instance = parse_opb(f, name=args.file.name, allow_objective=args.ignore_objective)
    except OSError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    except OpbSyntaxError as exc:
        print(f"error: {args.file}: {exc}", file=sys.stderr)
        return EXIT_ERROR
    config = SolverConfig(
        strategy=args.strategy,
        seed=args.seed,
        time_budget=args.timeout,
        emit_trace=args.emit_trace is not None,
    )
    result = solve(instance, config)
    if args.emit_trace is not None and result.trace is not None:
        result.trace.write_file(args.emit_trace)
    if result.status == SAT and args.verify_model:
        assert result.model is not None
        if not all(c.satisfied_by(result.model) for c in instance.constraints):
            print("error: model verification failed", file=sys.stderr)
            return EXIT_ERROR
        print("c model verified against the input")
    st = result.stats
    print(f"c conflicts {st.conflicts} decisions {st.decisions} propagations {st.propagations}")
    print(f"c learned {st.learned} restarts {st.restarts} max-coeff-bits {st.max_coeff_bits}")
    print(f"c seconds {st.seconds:.3f} assignments-per-second {st.assignments_per_second:.0f}")
    print(format_solution(result.status, result.model, instance.nvars))
    return {SAT: EXIT_SAT, UNSAT: EXIT_UNSAT, UNKNOWN: EXIT_UNKNOWN}[result.status]


def _cmd_bench(args) -> int:
    strategies = [s.strip() for s in args.strategies.split(",") if s.strip()]
    unknown = [s for s in strategies if s not in STRATEGY_IDS]
    if not strategies or unknown:
        print(f"error: unknown strategies: {', '.join(unknown) or '(none given)'}", file=sys.stderr)
        return EXIT_ERROR
    if not args.dir.is_dir():
        print(f"error: {args.dir} is not a directory", file=sys.stderr)
        return EXIT_ERROR
    paths = sorted(args.dir.glob("*.opb"))
    if not paths:
        print(f"error: no .opb files in {args.dir}", file=sys.stderr)
        return EXIT_ERROR
    if args.trace_dir is not None:
        args.trace_dir.mkdir(parents=True, exist_ok=True)
    records = run_matrix(
        paths, strategies, args.timeout, jobs=args.jobs, seed=args.seed,
        trace_dir=args.trace_dir,
    )
    with open(args.out, "w", encoding="ascii") as f:
        write_csv(records, f)
    cactus = args.cactus or args.out.with_suffix(".cactus.csv")
    with open(cactus, "w", encoding="ascii") as f:
        write_cactus_csv(records, f)
    solved = sum(r.status != UNKNOWN for r in records)
    print(f"c {len(records)} runs, {solved} solved; rows in {args.out}, cactus in {cactus}")
    return 0


def _cmd_generate(args) -> int:
    try:
        if args.family == "php":
            instance = php_instance(args.pigeons, args.holes)
        else:
            instance = random_instance(args.vars, args.constraints, args.max_weight, args.seed)
    except ValueError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    with open(args.out, "w", encoding="ascii") as f:
        write_opb(instance, f)
    print(f"c wrote {instance.name}: {len(instance.constraints)} constraints over {instance.nvars} variables")
    return 0


def _cmd_verify(args) -> int:
    try:
        with open(args.file, "r", encoding="ascii") as f:
            instance = parse_opb(f, name=args.file.name)
        check = verify_trace(instance, args.trace)
    except (OSError, OpbSyntaxError, ValueError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return EXIT_ERROR
    if check:
        print(f"c trace OK ({check.steps_checked} steps replayed)")
        return 0
    print(f"error: {check.error}", file=sys.stderr)
    return EXIT_ERROR


def main(argv: list[str] | None = None) -> int:
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        # argparse exits 2 on usage errors; fold into the documented code.
        return EXIT_ERROR if exc.code else 0
    handlers = {
        "solve": _cmd_solve,
        "bench": _cmd_bench,
        "generate": _cmd_generate,
        "verify": _cmd_verify,
    }
    return handlers[args.command](args)


if __name__ == "__main__":
    sys.exit(main())
