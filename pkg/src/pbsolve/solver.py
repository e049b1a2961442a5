"""The CDCL search loop over pseudo-Boolean constraints.

Decisions follow an activity heuristic with phase saving, propagation is
counter-based, and conflicts are analyzed by walking the trail backwards and
cancelling the current conflict constraint with the reason of each propagated
literal whose negation it contains, using the configured reduction strategy.
The walk stops as soon as the constraint asserts at some lower level; the
constraint is then learned, the solver backjumps to the smallest such level
and the learned constraint propagates there.  A conflict that persists at the
root level proves unsatisfiability.
"""

from __future__ import annotations

import time
from bisect import bisect_right
from dataclasses import dataclass, field

from . import core
from .analysis import parse_strategy, resolve_step
from .core import Constraint, neg, var_of
from .opb import ParsedInstance, SAT, UNKNOWN, UNSAT
from .propagation import PropagationEngine
from .trace import DerivationTrace

_UNASSIGNED_LEVEL = 1 << 62


def luby(i: int) -> int:
    """The i-th term (1-based) of the Luby restart sequence 1,1,2,1,1,2,4,..."""
    x = i - 1
    size, seq = 1, 0
    while size < x + 1:
        seq += 1
        size = 2 * size + 1
    while size - 1 != x:
        size = (size - 1) >> 1
        seq -= 1
        x %= size
    return 1 << seq


@dataclass
class SolverConfig:
    strategy: str = "partial-rs-both"
    seed: int = 0
    var_decay: float = 0.95
    restart_base: int = 100
    reduce_interval: int = 2000
    conflict_budget: int | None = None
    time_budget: float | None = None
    emit_trace: bool = False
    # Test instrumentation: called with (conflict, reason, pivot, rho, outcome)
    # after every resolve step.  Must not mutate its arguments.
    resolve_observer: object | None = None

    def __post_init__(self):
        if not 0 < self.var_decay < 1:
            raise ValueError("var_decay must lie in (0, 1)")
        if self.conflict_budget is not None and self.conflict_budget < 0:
            raise ValueError("conflict budget must be >= 0")
        if self.time_budget is not None and self.time_budget < 0:
            raise ValueError("time budget must be >= 0")
        parse_strategy(self.strategy)


@dataclass
class SolverStats:
    conflicts: int = 0
    decisions: int = 0
    propagations: int = 0
    restarts: int = 0
    learned: int = 0
    max_coeff_bits: int = 0
    fallbacks: int = 0
    seconds: float = 0.0

    @property
    def assignments_per_second(self) -> float:
        """Propagations plus decisions per wall-clock second."""
        if self.seconds <= 0:
            return 0.0
        return (self.propagations + self.decisions) / self.seconds


@dataclass
class SolverResult:
    status: str
    model: dict[int, bool] | None = None
    stats: SolverStats = field(default_factory=SolverStats)
    trace: DerivationTrace | None = None


class _RootConflict(Exception):
    """Raised when analysis reaches a conflict that persists at level 0."""

    def __init__(self, trace_id: int | None):
        super().__init__("conflict at the root level")
        self.trace_id = trace_id


class Solver:
    """One single-threaded solving run over a parsed instance."""

    def __init__(self, instance: ParsedInstance, config: SolverConfig | None = None):
        self.instance = instance
        self.config = config or SolverConfig()
        self.engine = PropagationEngine()
        self.stats = SolverStats()
        self.nvars = instance.nvars
        self.trace = DerivationTrace() if self.config.emit_trace else None
        self._trace_ids: dict[int, int] = {}  # engine cid -> trace id
        self._activity: dict[int, float] = {v: 0.0 for v in range(1, self.nvars + 1)}
        self._var_inc = 1.0
        self._phase: dict[int, bool] = {}
        self._learned_cids: list[int] = []
        self._cla_activity: dict[int, float] = {}
        self._cla_inc = 1.0
        self._conflicts_since_restart = 0
        self._learned_since_reduce = 0
        self._deadline: float | None = None
        for c in instance.constraints:
            cid = self.engine.add_constraint(c)
            if self.trace is not None:
                self._trace_ids[cid] = self.trace.add_input(c)
            self._note_coefficients(c)

    # -- public entry ---------------------------------------------------------

    def solve(self) -> SolverResult:
        started = time.monotonic()
        if self.config.time_budget is not None:
            self._deadline = started + self.config.time_budget
        try:
            result = self._search()
        except _RootConflict as root:
            if self.trace is not None and root.trace_id is not None:
                self.trace.mark_final(root.trace_id)
            result = SolverResult(UNSAT)
        self.stats.propagations = self.engine.propagations
        self.stats.seconds = time.monotonic() - started
        result.stats = self.stats
        result.trace = self.trace
        return result

    # -- main loop --------------------------------------------------------------

    def _search(self) -> SolverResult:
        if self.instance.contradiction:
            return SolverResult(UNSAT)
        conflict = self.engine.propagate_all()
        while True:
            if conflict is not None:
                self.stats.conflicts += 1
                self._conflicts_since_restart += 1
                if self.engine.current_level == 0:
                    raise _RootConflict(self._trace_ids.get(conflict))
                learned, trace_id, level, reused_cid = self.analyze_conflict(conflict)
                self._backjump_and_learn(learned, trace_id, level, reused_cid)
                self._decay_activities()
                if self.stats.conflicts % 1024 == 0 and self._out_of_time():
                    return SolverResult(UNKNOWN)
                if (
                    self.config.conflict_budget is not None
                    and self.stats.conflicts >= self.config.conflict_budget
                ):
                    return SolverResult(UNKNOWN)
                conflict = self.engine.propagate_all()
                continue
            if len(self.engine.assignment) == self.nvars:
                return SolverResult(SAT, model=self._checked_model())
            if self._restart_due():
                self.stats.restarts += 1
                self._conflicts_since_restart = 0
                if self.engine.current_level > 0:
                    self._record_phases(self.engine.backjump_to(0))
            if self.stats.decisions % 256 == 0 and self._out_of_time():
                return SolverResult(UNKNOWN)
            self._decide()
            conflict = self.engine.propagate_all()

    def _out_of_time(self) -> bool:
        return self._deadline is not None and time.monotonic() > self._deadline

    # -- decisions and heuristics ------------------------------------------------

    def decide_literal(self) -> int:
        """The next decision: unassigned variable of maximal activity, cached phase.

        Ties fall to the lowest index; fresh variables start at phase false.
        """
        best_v = 0
        best_a = -1.0
        assigned = self.engine.assignment
        for v in range(1, self.nvars + 1):
            if v in assigned:
                continue
            a = self._activity[v]
            if a > best_a:
                best_v, best_a = v, a
        if not best_v:
            raise ValueError("all variables are assigned")
        return best_v if self._phase.get(best_v, False) else -best_v

    def _decide(self) -> None:
        lit = self.decide_literal()
        self.stats.decisions += 1
        self.engine.assume(lit)

    def bump_variable(self, v: int) -> None:
        self._activity[v] += self._var_inc
        if self._activity[v] > 1e100:
            for u in self._activity:
                self._activity[u] *= 1e-100
            self._var_inc *= 1e-100

    def _decay_activities(self) -> None:
        self._var_inc /= self.config.var_decay
        self._cla_inc /= 0.999

    def _bump_constraint(self, cid: int) -> None:
        if cid in self._cla_activity:
            self._cla_activity[cid] += self._cla_inc
            if self._cla_activity[cid] > 1e20:
                for other in self._cla_activity:
                    self._cla_activity[other] *= 1e-20
                self._cla_inc *= 1e-20

    def _restart_due(self) -> bool:
        limit = self.config.restart_base * luby(self.stats.restarts + 1)
        return self._conflicts_since_restart >= limit

    def _record_phases(self, popped: list[tuple[int, bool]]) -> None:
        for v, value in popped:
            self._phase[v] = value

    # -- conflict analysis -------------------------------------------------------

    def analyze_conflict(self, conflict_cid: int):
        """Walk the trail backwards, cancelling until the constraint asserts.

        Returns (constraint, trace id, backjump level, reused cid or None).
        The assignment seen by each resolve step is the trail prefix up to and
        including that step's pivot, so the conflict invariant refers to the
        state in which the pivot was propagated.
        """
        engine = self.engine
        self._bump_constraint(conflict_cid)
        cur = engine.constraints[conflict_cid]
        assert cur is not None
        cur_id = self._trace_ids.get(conflict_cid)
        reused: int | None = conflict_cid
        rho = dict(engine.assignment)
        observer = self.config.resolve_observer
        pos = len(engine.trail) - 1
        while True:
            level = self._assertion_level(cur)
            if level is not None:
                return cur, cur_id, level, reused
            if pos < 0:
                raise _RootConflict(cur_id)
            entry = engine.trail[pos]
            if entry.level == 0:
                # Only root-level assignments remain, and the constraint is
                # still conflicting under them.
                raise _RootConflict(cur_id)
            pivot = entry.lit
            if entry.reason is None or neg(pivot) not in cur:
                del rho[var_of(pivot)]
                pos -= 1
                continue
            reason = engine.constraints[entry.reason]
            assert reason is not None
            self._bump_constraint(entry.reason)
            for v in sorted(set(cur.variables()) | set(reason.variables())):
                self.bump_variable(v)
            outcome = resolve_step(
                cur,
                reason,
                pivot,
                rho,
                self.config.strategy,
                trace=self.trace,
                conflict_id=cur_id,
                reason_id=self._trace_ids.get(entry.reason),
            )
            if observer is not None:
                observer(cur, reason, pivot, rho, outcome)
            if outcome.fallback:
                self.stats.fallbacks += 1
            cur, cur_id = outcome.constraint, outcome.trace_id
            reused = None
            del rho[var_of(pivot)]
            pos -= 1

    def _assertion_level(self, c: Constraint) -> int | None:
        """Smallest level (below the current one) at which ``c`` asserts.

        ``c`` asserts at level L when, restricted to assignments at levels
        <= L, its slack is non-negative and some unassigned literal's weight
        exceeds the slack.
        """
        engine = self.engine
        top = engine.current_level
        if top == 0:
            return None
        empty_slack = c.total_weight() - c.degree
        falsified: list[tuple[int, int]] = []  # (level, weight)
        avail: list[tuple[int, int]] = []  # (assignment level or huge, weight)
        for lit, w in c.terms:
            v = engine.assignment.get(var_of(lit))
            if v is None:
                avail.append((_UNASSIGNED_LEVEL, w))
                continue
            lvl = engine.level_of(var_of(lit))
            avail.append((lvl, w))
            if v != (lit > 0):
                falsified.append((lvl, w))
        falsified.sort()
        avail.sort()
        # Max weight among literals still unassigned above each level.
        suffix_max = [0] * (len(avail) + 1)
        for i in range(len(avail) - 1, -1, -1):
            suffix_max[i] = max(suffix_max[i + 1], avail[i][1])
        levels_only = [lvl for lvl, _ in avail]
        fi = 0
        removed = 0
        for level in range(0, top):
            while fi < len(falsified) and falsified[fi][0] <= level:
                removed += falsified[fi][1]
                fi += 1
            s = empty_slack - removed
            if s < 0:
                return None
            max_avail = suffix_max[bisect_right(levels_only, level)]
            if max_avail > s:
                return level
        return None

    # -- learning ----------------------------------------------------------------

    def _backjump_and_learn(
        self,
        learned: Constraint,
        trace_id: int | None,
        level: int,
        reused_cid: int | None,
    ) -> None:
        self._record_phases(self.engine.backjump_to(level))
        if reused_cid is not None:
            # Zero cancellations: the conflicting constraint itself asserts at
            # the lower level; re-scan it instead of storing a duplicate.
            self.engine.requeue(reused_cid)
            return
        cid = self.engine.add_constraint(learned)
        self._learned_cids.append(cid)
        self._cla_activity[cid] = self._cla_inc
        self.stats.learned += 1
        self._learned_since_reduce += 1
        self._note_coefficients(learned)
        if self.trace is not None and trace_id is not None:
            self._trace_ids[cid] = trace_id
            self.trace.mark_learned(trace_id)
        if self._learned_since_reduce >= self.config.reduce_interval:
            self._learned_since_reduce = 0
            self.reduce_db()

    def _note_coefficients(self, c: Constraint) -> None:
        bits = max(c.degree.bit_length(), c.max_weight.bit_length())
        if bits > self.stats.max_coeff_bits:
            self.stats.max_coeff_bits = bits

    def reduce_db(self) -> None:
        """Drop the lowest-activity half of learned constraints.

        Constraints currently serving as the reason of a trail literal are
        kept regardless of activity.
        """
        live = [cid for cid in self._learned_cids if self.engine.constraints[cid] is not None]
        protected = {
            e.reason for e in self.engine.trail if e.reason is not None
        }
        by_activity = sorted(
            (cid for cid in live if cid not in protected),
            key=lambda cid: (self._cla_activity.get(cid, 0.0), cid),
        )
        for cid in by_activity[: len(live) // 2]:
            self.engine.remove_constraint(cid)
            self._cla_activity.pop(cid, None)

    # -- results ------------------------------------------------------------------

    def _checked_model(self) -> dict[int, bool]:
        model = {v: self.engine.assignment[v] for v in range(1, self.nvars + 1)}
        for c in self.instance.constraints:
            if not c.satisfied_by(model):  # pragma: no cover - soundness guard
                raise AnalysisSoundnessError(
                    f"model does not satisfy {c.to_text()}"
                )
        return model


class AnalysisSoundnessError(RuntimeError):
    """A returned model failed the final verification (should be unreachable)."""


def is_assertive(c: Constraint, engine: PropagationEngine, level: int) -> bool:
    """True iff ``c`` would propagate under the trail restricted to ``level``."""
    rho = engine.assignment_at_level(level)
    if core.slack(c, rho) < 0:
        return False
    return bool(core.propagation_candidates(c, rho))


def backjump_level(c: Constraint, engine: PropagationEngine) -> int:
    """Smallest level at which ``c`` is assertive; raises when there is none."""
    for level in range(engine.current_level):
        if is_assertive(c, engine, level):
            return level
    raise ValueError("constraint is not assertive at any level below the current one")


def solve(instance: ParsedInstance, config: SolverConfig | None = None) -> SolverResult:
    """Convenience wrapper: run one solver instance to completion."""
    return Solver(instance, config).solve()
