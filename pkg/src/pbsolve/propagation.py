"""Trail management and counter-based unit propagation.

The engine keeps, for every attached constraint, its current slack under the
trail's assignment, updated incrementally: assigning a literal lowers the
slack of every constraint containing its negation by that literal's weight,
and unassigning restores it.  Propagation scans constraints whose slack may
admit candidates and assigns every unassigned literal whose weight exceeds
the slack.  One engine instance is strictly single-threaded.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

from .core import Constraint, var_of

#: Reason marker for decision entries.
DECISION = None


@dataclass
class TrailEntry:
    lit: int
    level: int
    reason: int | None  # constraint id, or DECISION


class PropagationEngine:
    def __init__(self):
        self.constraints: list[Constraint | None] = []  # None = removed
        self.slacks: list[int] = []
        self.occs: dict[int, list[tuple[int, int]]] = {}  # lit -> [(cid, weight)]
        self.trail: list[TrailEntry] = []
        self.assignment: dict[int, bool] = {}
        self.level_starts: list[int] = []  # trail position where each level begins
        self._var_pos: dict[int, int] = {}
        self._qhead = 0
        self._pending: deque[int] = deque()
        self.propagations = 0

    # -- database ---------------------------------------------------------

    def add_constraint(self, c: Constraint) -> int:
        """Attach a constraint, computing its slack under the current trail."""
        cid = len(self.constraints)
        self.constraints.append(c)
        s = -c.degree
        for lit, w in c.terms:
            self.occs.setdefault(lit, []).append((cid, w))
            v = self.assignment.get(var_of(lit))
            if v is None or v == (lit > 0):
                s += w
        self.slacks.append(s)
        self._pending.append(cid)
        return cid

    def remove_constraint(self, cid: int) -> None:
        """Detach a constraint (occurrence entries are skipped lazily)."""
        self.constraints[cid] = None

    def requeue(self, cid: int) -> None:
        """Schedule an attached constraint for a fresh propagation scan."""
        if self.constraints[cid] is not None:
            self._pending.append(cid)

    # -- assignment state ---------------------------------------------------

    @property
    def current_level(self) -> int:
        return len(self.level_starts)

    def value(self, lit: int) -> bool | None:
        v = self.assignment.get(var_of(lit))
        if v is None:
            return None
        return v == (lit > 0)

    def level_of(self, var: int) -> int:
        return self.trail[self._var_pos[var]].level

    def reason_of(self, var: int) -> int | None:
        return self.trail[self._var_pos[var]].reason

    def position_of(self, var: int) -> int:
        return self._var_pos[var]

    def assignment_at_level(self, level: int) -> dict[int, bool]:
        """The assignment restricted to trail entries at levels <= level."""
        out: dict[int, bool] = {}
        for e in self.trail:
            if e.level > level:
                break
            out[var_of(e.lit)] = e.lit > 0
        return out

    # -- trail operations ---------------------------------------------------

    def assign(self, lit: int, reason: int | None) -> None:
        """Append a literal to the trail and update affected slacks."""
        v = var_of(lit)
        if v in self.assignment:
            raise ValueError(f"variable x{v} is already assigned")
        self.assignment[v] = lit > 0
        self._var_pos[v] = len(self.trail)
        self.trail.append(TrailEntry(lit, self.current_level, reason))
        for cid, w in self.occs.get(-lit, ()):
            if self.constraints[cid] is not None:
                self.slacks[cid] -= w

    def assume(self, lit: int) -> None:
        """Open a new decision level and assign the literal as its decision."""
        self.level_starts.append(len(self.trail))
        self.assign(lit, DECISION)

    def propagate_all(self) -> int | None:
        """Propagate to fixpoint; return the first conflicting constraint id.

        Returns None when no constraint is conflicting, in which case no
        constraint propagates any further literal.
        """
        while True:
            if self._pending:
                cid = self._pending[0]
                c = self.constraints[cid]
                if c is None:
                    self._pending.popleft()
                    continue
                if self.slacks[cid] < 0:
                    # Left queued: the scan still owes its propagations after
                    # the conflict is repaired by backjumping.
                    return cid
                self._scan(cid, c)
                self._pending.popleft()
            elif self._qhead < len(self.trail):
                lit = self.trail[self._qhead].lit
                self._qhead += 1
                falsified = -lit
                for cid, w in self.occs.get(falsified, ()):
                    c = self.constraints[cid]
                    if c is None:
                        continue
                    s = self.slacks[cid]
                    if s < 0:
                        # Re-process this trail entry after backjumping so the
                        # remaining occurrences are not lost.
                        self._qhead -= 1
                        return cid
                    if s < c.max_weight:
                        self._scan(cid, c)
            else:
                return None

    def _scan(self, cid: int, c: Constraint) -> None:
        s = self.slacks[cid]
        if s >= c.max_weight:
            return
        for lit, w in c.terms:
            if w > s and self.assignment.get(var_of(lit)) is None:
                self.assign(lit, cid)
                self.propagations += 1

    def backjump_to(self, level: int) -> list[tuple[int, bool]]:
        """Remove all entries above ``level``; returns the unassigned (var, value) pairs."""
        if level >= self.current_level:
            raise ValueError(
                f"backjump level {level} is not below the current level {self.current_level}"
            )
        popped: list[tuple[int, bool]] = []
        while self.trail and self.trail[-1].level > level:
            e = self.trail.pop()
            v = var_of(e.lit)
            popped.append((v, e.lit > 0))
            del self.assignment[v]
            del self._var_pos[v]
            for cid, w in self.occs.get(-e.lit, ()):
                if self.constraints[cid] is not None:
                    self.slacks[cid] += w
        del self.level_starts[level:]
        self._qhead = min(self._qhead, len(self.trail))
        return popped

    # -- debugging / verification -------------------------------------------

    def recomputed_slack(self, cid: int) -> int:
        c = self.constraints[cid]
        assert c is not None
        s = -c.degree
        for lit, w in c.terms:
            v = self.assignment.get(var_of(lit))
            if v is None or v == (lit > 0):
                s += w
        return s

    def verify_slacks(self) -> bool:
        """Full recomputation check of every stored slack (debug oracle)."""
        for cid, c in enumerate(self.constraints):
            if c is None:
                continue
            if self.slacks[cid] != self.recomputed_slack(cid):
                return False
        return True
