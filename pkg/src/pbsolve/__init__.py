"""pbsolve: a pseudo-Boolean CDCL solver library.

The package is layered bottom-up: :mod:`pbsolve.core` holds normalized
constraints and the inference rules, :mod:`pbsolve.propagation` the trail and
incremental slacks, :mod:`pbsolve.analysis` the conflict-analysis reduction
strategies, :mod:`pbsolve.solver` the search loop, and :mod:`pbsolve.opb`,
:mod:`pbsolve.trace`, :mod:`pbsolve.generators`, :mod:`pbsolve.bench`,
:mod:`pbsolve.cli` the input/output and benchmarking surface.
"""

from .analysis import (
    STRATEGY_IDS,
    ResolveOutcome,
    reduce_genres,
    reduce_multiply_weaken,
    reduce_partial_rs,
    reduce_rs,
    resolve_step,
    weaken_ineffective,
)
from .bench import BenchRecord, run_matrix
from .core import (
    CONTRADICTION,
    TAUTOLOGY,
    Constraint,
    cancel,
    divide,
    implies_semantically,
    is_conflicting,
    neg,
    normalize,
    partial_weaken,
    propagation_candidates,
    saturate,
    slack,
    var_of,
    weaken,
)
from .generators import php_instance, random_instance
from .opb import (
    OpbSyntaxError,
    ParsedInstance,
    SAT,
    UNKNOWN,
    UNSAT,
    format_solution,
    parse_opb,
    write_opb,
)
from .propagation import DECISION, PropagationEngine
from .solver import Solver, SolverConfig, SolverResult, backjump_level, is_assertive, solve
from .trace import DerivationTrace, verify_trace

__version__ = "0.1.0"

__all__ = [
    "CONTRADICTION",
    "DECISION",
    "TAUTOLOGY",
    "BenchRecord",
    "Constraint",
    "DerivationTrace",
    "OpbSyntaxError",
    "ParsedInstance",
    "PropagationEngine",
    "ResolveOutcome",
    "SAT",
    "STRATEGY_IDS",
    "Solver",
    "SolverConfig",
    "SolverResult",
    "UNKNOWN",
    "UNSAT",
    "backjump_level",
    "cancel",
    "divide",
    "format_solution",
    "implies_semantically",
    "is_assertive",
    "is_conflicting",
    "neg",
    "normalize",
    "parse_opb",
    "partial_weaken",
    "php_instance",
    "propagation_candidates",
    "random_instance",
    "reduce_genres",
    "reduce_multiply_weaken",
    "reduce_partial_rs",
    "reduce_rs",
    "resolve_step",
    "run_matrix",
    "saturate",
    "slack",
    "solve",
    "var_of",
    "weaken",
    "weaken_ineffective",
    "write_opb",
]
