"""Recording, serializing and replay-checking derivations.

A trace assigns an id to every input constraint and to the output of every
rule application.  Each recorded step can be replayed bit-exactly from its
inputs and parameters, so an independent checker can validate a run without
trusting the solver: rule steps are recomputed and compared structurally, and
for unsatisfiability claims a plain root-level propagation over the inputs
plus the learned constraints must reach a conflict.

The file format is line-oriented text:

    * free-form comment
    i <id> <constraint>
    s <id> <rule> <args...> : <constraint>
    l <id>
    f <id>

with constraints written as ``<weight> <literal>`` pairs followed by
``>= <degree>`` and literals spelled ``xK`` / ``~xK``.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import IO, Iterable

from . import core
from .core import Constraint, lit_name, parse_lit
from .opb import ParsedInstance
from .propagation import PropagationEngine

RULES = ("cancel", "weaken", "pweaken", "saturate", "divide", "multiply")


@dataclass(frozen=True)
class RuleStep:
    """One replayable rule application."""

    step_id: int
    rule: str
    inputs: tuple[int, ...]
    params: tuple[int, ...]
    output: Constraint


def replay_step(rule: str, inputs: list[Constraint], params: tuple[int, ...]):
    """Recompute a rule application; returns a Constraint or a marker."""
    if rule == "cancel":
        return core.cancel(inputs[0], inputs[1], params[0])
    if rule == "weaken":
        return core.weaken(inputs[0], params[0])
    if rule == "pweaken":
        return core.partial_weaken(inputs[0], params[0], params[1])
    if rule == "saturate":
        return core.saturate(inputs[0])
    if rule == "divide":
        return core.divide(inputs[0], params[0])
    if rule == "multiply":
        return core.multiply(inputs[0], params[0])
    raise ValueError(f"unknown rule {rule!r}")


class DerivationTrace:
    """Accumulates inputs, rule steps, learned ids and the final conflict id."""

    def __init__(self):
        self.inputs: list[tuple[int, Constraint]] = []
        self.steps: list[RuleStep] = []
        self.learned: list[int] = []
        self.final: int | None = None
        self.notes: list[str] = []
        self.by_id: dict[int, Constraint] = {}
        self._next_id = 1

    def add_input(self, c: Constraint) -> int:
        i = self._next_id
        self._next_id += 1
        self.inputs.append((i, c))
        self.by_id[i] = c
        return i

    def record(
        self,
        rule: str,
        inputs: tuple[int, ...],
        params: tuple[int, ...],
        output: Constraint,
    ) -> int:
        i = self._next_id
        self._next_id += 1
        self.steps.append(RuleStep(i, rule, inputs, params, output))
        self.by_id[i] = output
        return i

    def mark_learned(self, step_id: int) -> None:
        self.learned.append(step_id)

    def mark_final(self, step_id: int) -> None:
        self.final = step_id

    def note(self, text: str) -> None:
        self.notes.append(text)

    # -- serialization -----------------------------------------------------

    def write(self, stream: IO[str]) -> None:
        for text in self.notes:
            stream.write(f"* {text}\n")
        for i, c in self.inputs:
            stream.write(f"i {i} {c.to_text()}\n")
        for st in self.steps:
            args = " ".join(str(x) for x in (*st.inputs, *st.params))
            stream.write(f"s {st.step_id} {st.rule} {args} : {st.output.to_text()}\n")
        for i in self.learned:
            stream.write(f"l {i}\n")
        if self.final is not None:
            stream.write(f"f {self.final}\n")

    def write_file(self, path: str | Path) -> None:
        with open(path, "w", encoding="ascii") as f:
            self.write(f)

    @classmethod
    def read(cls, lines: Iterable[str]) -> "DerivationTrace":
        trace = cls()
        for lineno, raw in enumerate(lines, start=1):
            line = raw.strip()
            if not line or line.startswith("*"):
                continue
            kind, _, rest = line.partition(" ")
            try:
                if kind == "i":
                    ident, _, ctext = rest.partition(" ")
                    i = int(ident)
                    c = Constraint.from_text(ctext)
                    trace.inputs.append((i, c))
                    trace.by_id[i] = c
                    trace._next_id = max(trace._next_id, i + 1)
                elif kind == "s":
                    head, _, ctext = rest.partition(" : ")
                    fields = head.split()
                    i = int(fields[0])
                    rule = fields[1]
                    if rule not in RULES:
                        raise ValueError(f"unknown rule {rule!r}")
                    nums = [_parse_arg(x) for x in fields[2:]]
                    n_inputs = 2 if rule == "cancel" else 1
                    step = RuleStep(
                        i,
                        rule,
                        tuple(nums[:n_inputs]),
                        tuple(nums[n_inputs:]),
                        Constraint.from_text(ctext),
                    )
                    trace.steps.append(step)
                    trace.by_id[i] = step.output
                    trace._next_id = max(trace._next_id, i + 1)
                elif kind == "l":
                    trace.learned.append(int(rest))
                elif kind == "f":
                    trace.final = int(rest)
                else:
                    raise ValueError(f"unknown record kind {kind!r}")
            except ValueError as exc:
                raise ValueError(f"trace line {lineno}: {exc}") from exc
        return trace

    @classmethod
    def read_file(cls, path: str | Path) -> "DerivationTrace":
        with open(path, "r", encoding="ascii") as f:
            return cls.read(f)


def _parse_arg(token: str) -> int:
    if token.startswith(("x", "~")):
        return parse_lit(token)
    return int(token)


@dataclass
class TraceCheck:
    """Outcome of a replay verification; truthy iff the trace is valid."""

    ok: bool
    error: str | None = None
    steps_checked: int = 0

    def __bool__(self) -> bool:
        return self.ok


def verify_trace(
    instance: ParsedInstance,
    trace: "DerivationTrace | str | Path | Iterable[str]",
) -> TraceCheck:
    """Replay every recorded step and validate an unsatisfiability claim.

    Checks, in order: the declared inputs match the instance's normalized
    constraints; every step references only earlier ids and replays
    bit-exactly; and, when a final conflict is declared, root-level
    propagation over inputs plus learned constraints yields a conflict.
    """
    if isinstance(trace, (str, Path)):
        trace = DerivationTrace.read_file(trace)
    elif not isinstance(trace, DerivationTrace):
        trace = DerivationTrace.read(trace)

    expected = instance.constraints
    if len(trace.inputs) != len(expected):
        return TraceCheck(False, f"input count mismatch: trace has {len(trace.inputs)}, instance has {len(expected)}")
    known: dict[int, Constraint] = {}
    for (i, c), ref in zip(trace.inputs, expected):
        if c != ref:
            return TraceCheck(False, f"input {i} does not match the instance: {c.to_text()!r} vs {ref.to_text()!r}")
        known[i] = c

    for index, st in enumerate(trace.steps):
        for ref_id in st.inputs:
            if ref_id not in known or ref_id >= st.step_id:
                return TraceCheck(False, f"step {index}: reference to unknown id {ref_id}", index)
        try:
            result = replay_step(st.rule, [known[i] for i in st.inputs], st.params)
        except ValueError as exc:
            return TraceCheck(False, f"step {index}: replay error: {exc}", index)
        if not isinstance(result, Constraint) or result != st.output:
            return TraceCheck(False, f"step {index}: replay mismatch for id {st.step_id}", index)
        known[st.step_id] = result

    for i in trace.learned:
        if i not in known:
            return TraceCheck(False, f"learned id {i} was never derived", len(trace.steps))

    if trace.final is not None:
        if trace.final not in known:
            return TraceCheck(False, f"final id {trace.final} was never derived", len(trace.steps))
        if not instance.contradiction and not _root_conflict(expected, [known[i] for i in trace.learned]):
            return TraceCheck(
                False,
                "unsatisfiability claim not confirmed by root-level propagation",
                len(trace.steps),
            )
    return TraceCheck(True, None, len(trace.steps))


def _root_conflict(inputs: list[Constraint], learned: list[Constraint]) -> bool:
    engine = PropagationEngine()
    for c in inputs:
        engine.add_constraint(c)
    for c in learned:
        if c.total_weight() < c.degree:
            return True  # semantically false on its own
        engine.add_constraint(c)
    return engine.propagate_all() is not None
