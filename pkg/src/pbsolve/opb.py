"""Reading and writing the OPB input format and the solution-line output.

The accepted grammar is the linear decision fragment used by the PB
competitions: ``*`` comment lines, an optional ``* #variable= N #constraint= M``
header, and constraint lines made of signed integer coefficients over ``xK``
tokens, a ``>=`` or ``=`` relation, an integer right-hand side and a closing
``;``.  Objective (``min:``) lines and nonlinear products are rejected.
"""

from __future__ import annotations

import re
import sys
from dataclasses import dataclass, field
from typing import IO, Iterable

from .core import CONTRADICTION, TAUTOLOGY, Constraint, normalize

_HEADER = re.compile(r"\*\s*#variable=\s*(\d+)\s+#constraint=\s*(\d+)")
_TOKEN = re.compile(r"\S+")
_INT = re.compile(r"[+-]?\d+$")
_VAR = re.compile(r"x(\d+)$")


class OpbSyntaxError(ValueError):
    """Parse failure carrying a 1-based line and column position."""

    def __init__(self, message: str, line: int, column: int):
        super().__init__(f"line {line}, column {column}: {message}")
        self.line = line
        self.column = column


@dataclass
class ParsedInstance:
    """A parsed OPB file: normalized constraints plus the declared sizes.

    Equality splitting and tautology removal mean the stored constraint count
    may differ from ``declared_constraints``; both are kept.  ``contradiction``
    is set when some input line normalizes to an unsatisfiable constant.
    """

    name: str = ""
    declared_vars: int = 0
    declared_constraints: int = 0
    constraints: list[Constraint] = field(default_factory=list)
    contradiction: bool = False

    @property
    def nvars(self) -> int:
        used = max((max(c.variables()) for c in self.constraints if len(c)), default=0)
        return max(self.declared_vars, used)


def parse_opb(
    source: str | IO[str],
    *,
    name: str = "",
    allow_objective: bool = False,
) -> ParsedInstance:
    """Parse OPB text (a string or a text stream) into a ParsedInstance."""
    if hasattr(source, "read"):
        text = source.read()
    else:
        text = source
    instance = ParsedInstance(name=name)
    n_lines = 0
    for lineno, raw in enumerate(text.splitlines(), start=1):
        line = raw.rstrip("\r")
        stripped = line.strip()
        if not stripped:
            continue
        if stripped.startswith("*"):
            m = _HEADER.search(line)
            if m:
                instance.declared_vars = int(m.group(1))
                instance.declared_constraints = int(m.group(2))
            continue
        if stripped.startswith("min:"):
            if allow_objective:
                print(
                    f"warning: objective on line {lineno} ignored (decision mode)",
                    file=sys.stderr,
                )
                continue
            col = line.index("min:") + 1
            raise OpbSyntaxError(
                "objective lines are not supported (decision problems only)",
                lineno,
                col,
            )
        n_lines += 1
        for result in normalize(*_parse_constraint_line(line, lineno)):
            if result is TAUTOLOGY:
                continue
            if result is CONTRADICTION:
                instance.contradiction = True
                continue
            instance.constraints.append(result)
    if not instance.declared_constraints:
        instance.declared_constraints = n_lines
    return instance


def _parse_constraint_line(line: str, lineno: int):
    tokens: list[tuple[str, int]] = []
    for m in _TOKEN.finditer(line):
        tok, col = m.group(), m.start() + 1
        # The terminator may be glued to the previous token.
        while tok.endswith(";") and len(tok) > 1:
            tok = tok[:-1]
        if tok != m.group():
            tokens.append((tok, col))
            tokens.append((";", col + len(tok)))
        else:
            tokens.append((tok, col))

    def fail(msg: str, col: int):
        raise OpbSyntaxError(msg, lineno, col)

    terms: list[tuple[int, int]] = []
    relation: str | None = None
    rhs: int | None = None
    i = 0
    while i < len(tokens):
        tok, col = tokens[i]
        if relation is None:
            if tok in (">=", "="):
                relation = tok
                i += 1
                continue
            if tok in ("<=", "<", ">"):
                fail(f"relation {tok!r} is not part of the OPB decision format", col)
            if _INT.match(tok):
                if i + 1 >= len(tokens):
                    fail("coefficient without a variable", col)
                vtok, vcol = tokens[i + 1]
                vm = _VAR.match(vtok)
                if not vm:
                    fail(f"expected a variable token after coefficient, got {vtok!r}", vcol)
                var = int(vm.group(1))
                if var < 1:
                    fail("variable index must be >= 1", vcol)
                if i + 2 < len(tokens) and _VAR.match(tokens[i + 2][0]):
                    fail("nonlinear term (two variable tokens in one term)", tokens[i + 2][1])
                terms.append((int(tok), var))
                i += 2
                continue
            if _VAR.match(tok):
                fail("variable without a coefficient (nonlinear input?)", col)
            fail(f"unexpected token {tok!r}", col)
        else:
            if rhs is None:
                if not _INT.match(tok):
                    fail(f"expected integer right-hand side, got {tok!r}", col)
                rhs = int(tok)
                i += 1
                continue
            if tok == ";":
                if i + 1 < len(tokens):
                    fail("trailing tokens after ';'", tokens[i + 1][1])
                return terms, relation, rhs
            fail(f"expected ';', got {tok!r}", col)
    if relation is None:
        fail("missing relation", len(line))
    if rhs is None:
        fail("missing right-hand side", len(line))
    fail("missing ';' terminator", len(line))


def write_opb(instance: ParsedInstance, stream: IO[str]) -> None:
    """Write an instance in OPB form; parse_opb(write_opb(i)) is equivalent to i.

    Negated literals are rewritten as negative coefficients on the positive
    variable with the right-hand side adjusted, which round-trips through
    normalization to the identical canonical constraint.
    """
    stream.write(
        f"* #variable= {instance.nvars} #constraint= {len(instance.constraints)}\n"
    )
    for c in instance.constraints:
        parts = []
        rhs = c.degree
        for lit, w in c.terms:
            if lit > 0:
                parts.append(f"+{w} x{lit}")
            else:
                parts.append(f"-{w} x{-lit}")
                rhs -= w
        parts.append(f">= {rhs} ;")
        stream.write(" ".join(parts) + "\n")


SAT = "SAT"
UNSAT = "UNSAT"
UNKNOWN = "UNKNOWN"

_STATUS_WORDS = {SAT: "SATISFIABLE", UNSAT: "UNSATISFIABLE", UNKNOWN: "UNKNOWN"}


def format_solution(
    status: str,
    model: dict[int, bool] | None = None,
    nvars: int = 0,
) -> str:
    """Competition-style solution lines: ``s ...`` plus a ``v`` line for SAT."""
    if status not in _STATUS_WORDS:
        raise ValueError(f"unknown status {status!r}")
    if (model is not None) != (status == SAT):
        raise ValueError("a model must be given exactly when the status is SAT")
    out = f"s {_STATUS_WORDS[status]}"
    if status == SAT:
        assert model is not None
        width = max(nvars, max(model, default=0))
        values = ("x%d" % v if model.get(v, False) else "-x%d" % v for v in range(1, width + 1))
        out += "\nv " + " ".join(values)
    return out
