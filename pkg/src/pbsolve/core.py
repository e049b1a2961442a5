"""Normalized pseudo-Boolean constraints and the cutting-planes inference rules.

A constraint is kept in the normalized form ``sum(w_i * l_i) >= degree`` with
positive integer weights over literals of pairwise distinct variables.
Literals are signed integers (``+v`` / ``-v`` for variable index ``v >= 1``),
partial assignments are mappings ``variable -> bool`` (absent = unassigned),
and every rule operation is a pure function returning a fresh value.

Weights and degrees are plain Python integers, so coefficient growth during
cancellation chains never overflows.
"""

from __future__ import annotations

import functools
import itertools
from math import lcm
from typing import Iterable, Iterator, Mapping, Sequence

import numpy as np

Assignment = Mapping[int, bool]


class _Marker:
    """Sentinel for constraints that normalize away entirely."""

    __slots__ = ("_label",)

    def __init__(self, label: str):
        self._label = label

    def __repr__(self) -> str:
        return self._label


#: Trivially true result (degree dropped to 0 or below).  Never stored.
TAUTOLOGY = _Marker("TAUTOLOGY")
#: Trivially false result (no way to reach the degree).  Never stored.
CONTRADICTION = _Marker("CONTRADICTION")


def neg(lit: int) -> int:
    """Negation of a literal; an involution."""
    return -lit


def var_of(lit: int) -> int:
    """Variable index of a literal."""
    return lit if lit > 0 else -lit


def lit_name(lit: int) -> str:
    return f"x{lit}" if lit > 0 else f"~x{-lit}"


def parse_lit(token: str) -> int:
    """Inverse of :func:`lit_name` (``x3`` / ``~x3``)."""
    s = token
    sign = 1
    if s.startswith("~"):
        sign = -1
        s = s[1:]
    if not s.startswith("x") or not s[1:].isdigit():
        raise ValueError(f"bad literal token {token!r}")
    v = int(s[1:])
    if v < 1:
        raise ValueError(f"variable index must be >= 1: {token!r}")
    return sign * v


def lit_truth(lit: int, rho: Assignment) -> bool | None:
    """Truth value of a literal under a partial assignment (None = unassigned)."""
    v = rho.get(var_of(lit))
    if v is None:
        return None
    return v == (lit > 0)


class Constraint:
    """An immutable normalized PB constraint ``sum(w_i * l_i) >= degree``.

    Terms are held in canonical order (ascending variable index), so equality
    and hashing are structural.  The constructor validates the normalized-form
    invariants: positive weights, one literal per variable, degree >= 1.
    Instances must never be mutated.
    """

    __slots__ = ("terms", "degree", "_weights", "_maxw")

    def __init__(self, terms: Iterable[tuple[int, int]], degree: int):
        pairs = sorted(terms, key=lambda t: var_of(t[0]))
        weights: dict[int, int] = {}
        seen: set[int] = set()
        for lit, w in pairs:
            if w < 1:
                raise ValueError(f"weight must be >= 1, got {w} on {lit_name(lit)}")
            v = var_of(lit)
            if v < 1:
                raise ValueError(f"variable index must be >= 1, got literal {lit}")
            if v in seen:
                raise ValueError(f"variable x{v} occurs twice")
            seen.add(v)
            weights[lit] = w
        if degree < 1:
            raise ValueError(f"degree must be >= 1, got {degree}")
        self.terms: tuple[tuple[int, int], ...] = tuple(pairs)
        self.degree: int = degree
        self._weights = weights
        self._maxw = max(weights.values()) if weights else 0

    @classmethod
    def from_dict(cls, weights: Mapping[int, int], degree: int) -> "Constraint":
        return cls(weights.items(), degree)

    @classmethod
    def from_text(cls, text: str) -> "Constraint":
        """Parse the :meth:`to_text` form, e.g. ``6 ~x2 4 x5 >= 7``."""
        left, _, right = text.partition(">=")
        tokens = left.split()
        if len(tokens) % 2 != 0:
            raise ValueError(f"odd token count in {text!r}")
        terms = []
        for i in range(0, len(tokens), 2):
            terms.append((parse_lit(tokens[i + 1]), int(tokens[i])))
        return cls(terms, int(right.strip()))

    def to_text(self) -> str:
        parts = [f"{w} {lit_name(lit)}" for lit, w in self.terms]
        return " ".join(parts) + f" >= {self.degree}"

    def weight_of(self, lit: int) -> int:
        """Weight of a literal; 0 when the literal is absent."""
        return self._weights.get(lit, 0)

    def __contains__(self, lit: int) -> bool:
        return lit in self._weights

    def literals(self) -> tuple[int, ...]:
        return tuple(lit for lit, _ in self.terms)

    def variables(self) -> tuple[int, ...]:
        return tuple(var_of(lit) for lit, _ in self.terms)

    @property
    def max_weight(self) -> int:
        return self._maxw

    def total_weight(self) -> int:
        return sum(w for _, w in self.terms)

    def is_clause(self) -> bool:
        return self.degree == 1 and all(w == 1 for _, w in self.terms)

    def satisfied_by(self, total: Assignment) -> bool:
        """Evaluate under a total assignment (missing variables count false)."""
        got = 0
        for lit, w in self.terms:
            v = total.get(var_of(lit), False)
            if v == (lit > 0):
                got += w
        return got >= self.degree

    def __len__(self) -> int:
        return len(self.terms)

    def __iter__(self) -> Iterator[tuple[int, int]]:
        return iter(self.terms)

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Constraint):
            return NotImplemented
        return self.degree == other.degree and self.terms == other.terms

    def __hash__(self) -> int:
        return hash((self.terms, self.degree))

    def __repr__(self) -> str:
        return f"Constraint({self.to_text()!r})"


def normalize(
    raw_terms: Sequence[tuple[int, int]],
    relation: str,
    rhs: int,
) -> list[Constraint | _Marker]:
    """Normalize a raw linear relation over Boolean literals.

    ``raw_terms`` holds ``(signed weight, literal)`` pairs.  ``>=`` and ``<=``
    yield one result, ``=`` yields two.  Each result is a saturated
    :class:`Constraint`, or TAUTOLOGY / CONTRADICTION when the relation is
    trivially true / unsatisfiable over 0/1 assignments.
    """
    if relation == ">=":
        return [_normalize_geq(raw_terms, rhs)]
    if relation == "<=":
        flipped = [(-w, lit) for w, lit in raw_terms]
        return [_normalize_geq(flipped, -rhs)]
    if relation == "=":
        geq = _normalize_geq(raw_terms, rhs)
        flipped = [(-w, lit) for w, lit in raw_terms]
        leq = _normalize_geq(flipped, -rhs)
        return [geq, leq]
    raise ValueError(f"unknown relation {relation!r}")


def _normalize_geq(raw_terms, rhs):
    # Net coefficient per variable on the positive literal; rewriting a term
    # on ~v as w - w*v moves w onto the right-hand side.
    net: dict[int, int] = {}
    degree = rhs
    for w, lit in raw_terms:
        v = var_of(lit)
        if lit > 0:
            net[v] = net.get(v, 0) + w
        else:
            net[v] = net.get(v, 0) - w
            degree -= w
    weights: dict[int, int] = {}
    for v in net:
        a = net[v]
        if a > 0:
            weights[v] = a
        elif a < 0:
            weights[-v] = -a
            degree += -a
    if degree <= 0:
        return TAUTOLOGY
    if sum(weights.values()) < degree:
        # Even the all-true assignment cannot reach the degree.
        return CONTRADICTION
    capped = {lit: min(w, degree) for lit, w in weights.items()}
    return Constraint.from_dict(capped, degree)


def slack(c: Constraint, rho: Assignment) -> int:
    """Sum of the weights of non-falsified literals minus the degree."""
    s = -c.degree
    for lit, w in c.terms:
        v = rho.get(lit if lit > 0 else -lit)
        if v is None or v == (lit > 0):
            s += w
    return s


def is_conflicting(c: Constraint, rho: Assignment) -> bool:
    """True iff the constraint is falsified under ``rho`` (negative slack)."""
    return slack(c, rho) < 0


def propagation_candidates(c: Constraint, rho: Assignment) -> tuple[int, ...]:
    """Unassigned literals whose weight exceeds the slack.

    Those literals must be satisfied for the constraint to remain satisfiable,
    so they are propagated.  Requires a non-negative slack.
    """
    s = slack(c, rho)
    if s < 0:
        raise ValueError("constraint is conflicting; no propagation candidates")
    if s >= c.max_weight:
        return ()
    return tuple(
        lit for lit, w in c.terms if w > s and rho.get(var_of(lit)) is None
    )


def cancel_multipliers(c1: Constraint, c2: Constraint, pivot: int) -> tuple[int, int]:
    """Minimal multipliers (mu, nu) equalizing the pivot weights of c1 and c2."""
    w1 = c1.weight_of(pivot) or c1.weight_of(-pivot)
    w2 = c2.weight_of(pivot) or c2.weight_of(-pivot)
    if not w1 or not w2:
        raise ValueError(f"pivot x{pivot} must occur in both constraints")
    if (pivot in c1) == (pivot in c2):
        raise ValueError(f"pivot x{pivot} must occur with opposite polarities")
    common = lcm(w1, w2)
    return common // w1, common // w2


def cancel(c1: Constraint, c2: Constraint, pivot: int) -> Constraint | _Marker:
    """Cancellation: the weighted sum of c1 and c2 eliminating ``pivot``.

    Uses the minimal (LCM) multipliers.  Opposing literal pairs other than the
    pivot are merged: the dominant polarity keeps the weight difference and
    the degree drops by the cancelled amount.  The result is *not* saturated.
    """
    mu, nu = cancel_multipliers(c1, c2, pivot)
    merged: dict[int, int] = {}
    for lit, w in c1.terms:
        merged[lit] = merged.get(lit, 0) + mu * w
    for lit, w in c2.terms:
        merged[lit] = merged.get(lit, 0) + nu * w
    degree = mu * c1.degree + nu * c2.degree
    weights: dict[int, int] = {}
    done: set[int] = set()
    for lit in merged:
        v = var_of(lit)
        if v in done:
            continue
        done.add(v)
        a, b = merged.get(v, 0), merged.get(-v, 0)
        cancelled = min(a, b)
        degree -= cancelled
        if a > b:
            weights[v] = a - b
        elif b > a:
            weights[-v] = b - a
    if degree <= 0:
        return TAUTOLOGY
    return Constraint.from_dict(weights, degree)


def weaken(c: Constraint, lit: int) -> Constraint | _Marker:
    """Remove a literal and lower the degree by its weight."""
    w = c.weight_of(lit)
    if not w:
        raise ValueError(f"literal {lit_name(lit)} is absent")
    degree = c.degree - w
    if degree <= 0:
        return TAUTOLOGY
    weights = {l: x for l, x in c.terms if l != lit}
    return Constraint.from_dict(weights, degree)


def partial_weaken(c: Constraint, lit: int, eps: int) -> Constraint | _Marker:
    """Lower a literal's weight and the degree by ``eps`` (0 < eps <= weight).

    ``eps`` equal to the full weight coincides with :func:`weaken`.
    """
    w = c.weight_of(lit)
    if not w:
        raise ValueError(f"literal {lit_name(lit)} is absent")
    if not 0 < eps <= w:
        raise ValueError(f"eps must be in 1..{w}, got {eps}")
    degree = c.degree - eps
    if degree <= 0:
        return TAUTOLOGY
    weights = {l: x for l, x in c.terms if l != lit}
    if w - eps:
        weights[lit] = w - eps
    return Constraint.from_dict(weights, degree)


def saturate(c: Constraint) -> Constraint:
    """Cap every weight at the degree.  Idempotent."""
    if c.max_weight <= c.degree:
        return c
    return Constraint.from_dict(
        {lit: min(w, c.degree) for lit, w in c.terms}, c.degree
    )


def divide(c: Constraint, r: int) -> Constraint:
    """Ceiling-divide every weight and the degree by ``r >= 1``."""
    if r < 1:
        raise ValueError(f"divisor must be >= 1, got {r}")
    if r == 1:
        return c
    return Constraint.from_dict(
        {lit: -(-w // r) for lit, w in c.terms}, -(-c.degree // r)
    )


def multiply(c: Constraint, k: int) -> Constraint:
    """Scale every weight and the degree by ``k >= 1``.

    Not exposed as a user-facing rule; it is the building block of
    cancellation and of the multiply-and-weaken reduction.
    """
    if k < 1:
        raise ValueError(f"multiplier must be >= 1, got {k}")
    if k == 1:
        return c
    return Constraint.from_dict({lit: k * w for lit, w in c.terms}, k * c.degree)


_ENUMERATION_LIMIT = 20
_INT64_SAFE = 1 << 60


@functools.lru_cache(maxsize=8)
def _row_indices(n: int) -> np.ndarray:
    return np.arange(1 << n, dtype=np.int64)


def _truth_table(c: Constraint, index: Mapping[int, int], rows: np.ndarray) -> np.ndarray:
    # sum over true literals == base + sum(coef_v * bit_v) with coef signed.
    base = 0
    total = np.zeros(len(rows), dtype=np.int64)
    for lit, w in c.terms:
        i = index[var_of(lit)]
        bit = (rows >> i) & 1
        if lit > 0:
            total += w * bit
        else:
            base += w
            total -= w * bit
    return total + base >= c.degree


def implies_semantically(
    premises: Sequence[Constraint],
    conclusion: Constraint,
    variables: Iterable[int] | None = None,
) -> bool:
    """Exhaustive-enumeration implication check (the test oracle).

    True iff every total 0/1 assignment of ``variables`` satisfying all
    premises also satisfies the conclusion.  Limited to 20 variables.
    """
    if variables is None:
        vs: set[int] = set()
        for p in premises:
            vs.update(p.variables())
        vs.update(conclusion.variables())
    else:
        vs = set(variables)
        for c in (*premises, conclusion):
            missing = set(c.variables()) - vs
            if missing:
                raise ValueError(f"constraint mentions variables outside the set: {sorted(missing)}")
    order = sorted(vs)
    n = len(order)
    if n > _ENUMERATION_LIMIT:
        raise ValueError(f"enumeration bound exceeded: {n} > {_ENUMERATION_LIMIT}")
    small = all(
        c.total_weight() + c.degree < _INT64_SAFE for c in (*premises, conclusion)
    )
    if small:
        index = {v: i for i, v in enumerate(order)}
        rows = _row_indices(n)
        ok = np.ones(len(rows), dtype=bool)
        for p in premises:
            ok &= _truth_table(p, index, rows)
            if not ok.any():
                return True
        return bool(np.all(_truth_table(conclusion, index, rows)[ok]))
    # Arbitrary-precision fallback for oversized coefficients.
    for values in itertools.product((False, True), repeat=n):
        total = dict(zip(order, values))
        if all(p.satisfied_by(total) for p in premises) and not conclusion.satisfied_by(total):
            return False
    return True
