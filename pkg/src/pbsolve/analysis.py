"""Conflict-analysis reduction strategies.

Each cancellation step during conflict analysis combines the current conflict
constraint with the reason of a propagated literal.  The raw cancellation
does not always keep the result conflicting, so one or both sides are reduced
first.  This module implements the reduction families as pure functions over
constraints plus a read-only assignment view:

* ``gen-res``            weaken-and-saturate the reason until the scaled-slack
                         sum certifies the conflict is preserved;
* ``rs-*``               fully weaken non-falsified literals whose weight is
                         not divisible by the pivot weight, then divide by it
                         (pivot weight becomes 1);
* ``partial-rs-*``       same, but only shave each weight down to the nearest
                         multiple of the pivot weight before dividing;
* ``weaken-ineffective-*`` greedily drop literals that play no role in the
                         conflict or propagation, shortening the constraint;
* ``multiply-weaken``    scale the reason and weaken ineffective literals so
                         the pivot weights match after saturation, avoiding
                         LCM coefficient growth.

The ``-both`` / ``-conflict`` / ``-reason`` suffix selects the side(s) the
reduction is applied to.  The assignment passed to these functions is the
trail prefix up to and including the pivot's own assignment.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from . import core
from .core import Constraint, TAUTOLOGY, is_conflicting, neg, slack, var_of
from .trace import DerivationTrace, RuleStep

#: The exact strategy identifiers accepted on the command line.
STRATEGY_IDS = (
    "gen-res",
    "rs-both",
    "rs-conflict",
    "rs-reason",
    "partial-rs-both",
    "partial-rs-conflict",
    "partial-rs-reason",
    "weaken-ineffective-both",
    "weaken-ineffective-conflict",
    "weaken-ineffective-reason",
    "multiply-weaken",
)


def parse_strategy(name: str) -> tuple[str, str | None]:
    """Split a strategy id into (family, side); raises on unknown ids."""
    if name not in STRATEGY_IDS:
        raise ValueError(f"unknown strategy {name!r} (choose from {', '.join(STRATEGY_IDS)})")
    for family in ("rs", "partial-rs", "weaken-ineffective"):
        prefix = family + "-"
        if name.startswith(prefix) and name[len(prefix):] in ("both", "conflict", "reason"):
            return family, name[len(prefix):]
    return name, None


class AnalysisError(RuntimeError):
    """Internal invariant breach during conflict analysis."""


class Deriver:
    """Applies core rules on (constraint, id) nodes, recording replayable steps.

    With ``trace=None`` the ids stay None and nothing is recorded; the
    constraint arithmetic is identical either way.  No-op saturations,
    unit divisions and unit multiplications are skipped entirely.
    """

    def __init__(self, trace: DerivationTrace | None = None):
        self.trace = trace
        self.steps: list[RuleStep] = []

    def node(self, constraint: Constraint, trace_id: int | None = None):
        return (constraint, trace_id)

    def _emit(self, rule, inputs, params, out):
        if self.trace is None:
            return (out, None)
        in_ids = tuple(i for _, i in inputs)
        if any(i is None for i in in_ids):
            raise ValueError("tracing requires registered input ids")
        out_id = self.trace.record(rule, in_ids, params, out)
        self.steps.append(self.trace.steps[-1])
        return (out, out_id)

    def cancel(self, n1, n2, pivot_var: int):
        out = core.cancel(n1[0], n2[0], pivot_var)
        if out is TAUTOLOGY:
            raise AnalysisError("cancellation produced a tautology during analysis")
        return self._emit("cancel", (n1, n2), (pivot_var,), out)

    def weaken(self, n, lit: int):
        out = core.weaken(n[0], lit)
        if out is TAUTOLOGY:
            raise AnalysisError("weakening produced a tautology during analysis")
        return self._emit("weaken", (n,), (lit,), out)

    def partial_weaken(self, n, lit: int, eps: int):
        out = core.partial_weaken(n[0], lit, eps)
        if out is TAUTOLOGY:
            raise AnalysisError("partial weakening produced a tautology during analysis")
        return self._emit("pweaken", (n,), (lit, eps), out)

    def saturate(self, n):
        out = core.saturate(n[0])
        if out is n[0]:
            return n
        return self._emit("saturate", (n,), (), out)

    def divide(self, n, r: int):
        if r == 1:
            return n
        return self._emit("divide", (n,), (r,), core.divide(n[0], r))

    def multiply(self, n, k: int):
        if k == 1:
            return n
        return self._emit("multiply", (n,), (k,), core.multiply(n[0], k))


@dataclass
class ResolveOutcome:
    """Result of one strategy-guided cancellation step."""

    constraint: Constraint
    trace_id: int | None = None
    steps: list[RuleStep] = field(default_factory=list)
    fallback: bool = False


def _falsified(lit: int, rho) -> bool:
    v = rho.get(var_of(lit))
    return v is not None and v != (lit > 0)


def _genres_reduce(conflict: Constraint, reason_node, pivot: int, rho, deriver: Deriver):
    """Weaken and saturate the reason until the conflict is provably preserved.

    The loop guard is the subadditivity bound: with ``mu, nu`` the minimal
    multipliers equalizing the pivot weights, the cancellation's slack is at
    most ``mu*slack(conflict) + nu*slack(reason)``, so a negative sum keeps
    the result conflicting.  Only non-falsified literals may be removed, and
    each removal is followed by saturation, which may shrink the pivot weight
    and therefore changes the multipliers.
    """
    conflict_slack = slack(conflict, rho)
    while True:
        reason = reason_node[0]
        mu, nu = core.cancel_multipliers(conflict, reason, var_of(pivot))
        if mu * conflict_slack + nu * slack(reason, rho) < 0:
            return reason_node
        candidates = sorted(
            (
                (w, -var_of(lit), lit)
                for lit, w in reason.terms
                if lit != pivot and not _falsified(lit, rho)
            ),
        )
        if not candidates:
            raise AnalysisError("no weakenable literal left in a reason with high slack")
        reason_node = deriver.weaken(reason_node, candidates[0][2])
        reason_node = deriver.saturate(reason_node)


def reduce_genres(conflict: Constraint, reason: Constraint, pivot: int, rho) -> Constraint:
    """Reason reduced for plain cancellation; see :func:`_genres_reduce`."""
    return _genres_reduce(conflict, (reason, None), pivot, rho, Deriver())[0]


def _rs_reduce(node, pivot: int, rho, deriver: Deriver, partial: bool):
    c = node[0]
    r = c.weight_of(pivot)
    if not r:
        raise ValueError("pivot does not occur in the constraint")
    for lit, w in c.terms:
        if lit == pivot or _falsified(lit, rho):
            continue
        rem = w % r
        if rem == 0:
            continue
        if partial and rem != w:
            node = deriver.partial_weaken(node, lit, rem)
        else:
            node = deriver.weaken(node, lit)
    return deriver.divide(node, r)


def reduce_rs(c: Constraint, pivot: int, rho) -> Constraint:
    """Aggressive rounding reduction: the pivot weight becomes exactly 1.

    Every non-falsified literal other than the pivot whose weight is not
    divisible by the pivot weight is weakened away, then the constraint is
    divided by the pivot weight.
    """
    return _rs_reduce((c, None), pivot, rho, Deriver(), partial=False)[0]


def reduce_partial_rs(c: Constraint, pivot: int, rho) -> Constraint:
    """Like :func:`reduce_rs` but weakens only by each weight's remainder.

    The surviving weights are multiples of the pivot weight, so the division
    loses nothing; the result dominates :func:`reduce_rs` pointwise.
    """
    return _rs_reduce((c, None), pivot, rho, Deriver(), partial=True)[0]


def _ineffective_reduce(node, rho, deriver: Deriver, pivot: int | None, protect: int | None):
    """Greedy weakening of literals that do not affect the constraint's role.

    ``pivot=None`` preserves a conflict (slack stays negative); otherwise the
    propagation of ``pivot`` is preserved (its weight stays above the slack).
    Non-falsified literals are tried first (their removal never changes the
    slack), then falsified ones; each committed weakening is saturated.
    ``protect`` is never weakened: the caller needs it for the upcoming
    cancellation.
    """
    c = node[0]
    start = slack(c, rho)
    if pivot is None:
        if start >= 0:
            raise ValueError("preserve-conflict mode requires a conflicting constraint")
    else:
        if not 0 <= start < c.weight_of(pivot):
            raise ValueError("preserve-propagation mode requires the pivot to be propagated")
    order = sorted(
        (
            (_falsified(lit, rho), w, var_of(lit), lit)
            for lit, w in c.terms
            if lit != pivot and lit != protect
        ),
    )
    for _, _, _, lit in order:
        cur = node[0]
        trial = core.weaken(cur, lit)
        if trial is TAUTOLOGY:
            continue
        trial = core.saturate(trial)
        if pivot is None:
            if slack(trial, rho) >= 0:
                continue
        else:
            if trial.weight_of(pivot) <= slack(trial, rho):
                continue
        node = deriver.weaken(node, lit)
        node = deriver.saturate(node)
    return node


def weaken_ineffective(
    c: Constraint,
    rho,
    *,
    pivot: int | None = None,
    protect: int | None = None,
) -> Constraint:
    """Shorten a constraint by weakening literals while its role is preserved."""
    return _ineffective_reduce((c, None), rho, Deriver(), pivot, protect)[0]


def _multiply_weaken_reduce(reason_node, pivot: int, conflict_pivot_weight: int, rho, deriver: Deriver):
    """Scale the reason and weaken ineffective literals down to a matching degree.

    With ``r`` the reason's pivot weight and ``c`` the conflict's, the minimal
    ``mu = 1`` and ``nu = ceil(c/r)`` satisfy ``(nu-1)*r < mu*c <= nu*r``.  The
    reason is multiplied by ``nu`` and its degree lowered to exactly ``mu*c``
    by weakening ineffective literals (full removals in ascending weight, then
    one partial weakening), so saturation caps the pivot weight at ``mu*c``
    and the cancellation multiplies the conflict by ``mu`` and the reason
    by 1.  Returns None when the ineffective mass cannot cover the drop; the
    caller then falls back to the gen-res reduction for this step.
    """
    reason = reason_node[0]
    r = reason.weight_of(pivot)
    cw = conflict_pivot_weight
    mu = 1
    nu = -(-mu * cw // r)
    target = mu * cw
    need = nu * reason.degree - target
    if need < 0:
        # Only reachable when the reason is unsaturated (pivot weight above
        # the degree): the degree cannot be *reduced* to the target.
        return None, mu
    ineffective = sorted(
        (w, var_of(lit), lit)
        for lit, w in reason.terms
        if lit != pivot and not _falsified(lit, rho)
    )
    if sum(nu * w for w, _, _ in ineffective) < need:
        return None, mu
    node = deriver.multiply(reason_node, nu)
    for w, _, lit in ineffective:
        if need == 0:
            break
        scaled = nu * w
        if scaled <= need:
            node = deriver.weaken(node, lit)
            need -= scaled
        else:
            node = deriver.partial_weaken(node, lit, need)
            need = 0
    node = deriver.saturate(node)
    return node, mu


def reduce_multiply_weaken(
    reason: Constraint,
    pivot: int,
    conflict_pivot_weight: int,
    rho,
) -> tuple[Constraint | None, int]:
    """Public form of the multiply-and-weaken reduction; None means fallback."""
    node, mu = _multiply_weaken_reduce((reason, None), pivot, conflict_pivot_weight, rho, Deriver())
    return (node[0] if node is not None else None), mu


def resolve_step(
    conflict: Constraint,
    reason: Constraint,
    pivot: int,
    rho,
    strategy: str,
    *,
    trace: DerivationTrace | None = None,
    conflict_id: int | None = None,
    reason_id: int | None = None,
) -> ResolveOutcome:
    """One strategy-guided cancellation between a conflict and a reason.

    ``pivot`` is the propagated literal: it occurs positively in the reason
    and negated in the conflict.  ``rho`` is the assignment in effect at this
    step (up to and including the pivot).  The returned constraint is
    saturated and guaranteed to be conflicting under ``rho``; a violation of
    that guarantee raises :class:`AnalysisError` since every reduction family
    establishes it by construction.
    """
    if not is_conflicting(conflict, rho):
        raise ValueError("conflict side is not conflicting under the assignment")
    if neg(pivot) not in conflict:
        raise ValueError("the pivot's negation does not occur in the conflict side")
    if pivot not in reason:
        raise ValueError("the pivot does not occur in the reason side")

    deriver = Deriver(trace)
    cnode = deriver.node(conflict, conflict_id)
    rnode = deriver.node(reason, reason_id)
    family, side = parse_strategy(strategy)
    fallback = False

    if family == "gen-res":
        rnode = _genres_reduce(cnode[0], rnode, pivot, rho, deriver)
    elif family in ("rs", "partial-rs"):
        partial = family == "partial-rs"
        if side in ("both", "conflict"):
            cnode = _rs_reduce(cnode, neg(pivot), rho, deriver, partial)
        if side in ("both", "reason"):
            rnode = _rs_reduce(rnode, pivot, rho, deriver, partial)
    elif family == "weaken-ineffective":
        if side in ("both", "conflict"):
            cnode = _ineffective_reduce(cnode, rho, deriver, None, neg(pivot))
        if side in ("both", "reason"):
            rnode = _ineffective_reduce(rnode, rho, deriver, pivot, None)
        if side == "conflict":
            # The reduced conflict's pivot weight may exceed 1, in which case
            # the cancellation needs the reason weakened as in gen-res.
            rnode = _genres_reduce(cnode[0], rnode, pivot, rho, deriver)
    elif family == "multiply-weaken":
        reduced, _ = _multiply_weaken_reduce(rnode, pivot, conflict.weight_of(neg(pivot)), rho, deriver)
        if reduced is None:
            fallback = True
            if trace is not None:
                trace.note(f"multiply-weaken fallback after {len(trace.steps)} steps")
        else:
            rnode = reduced
        rnode = _genres_reduce(cnode[0], rnode, pivot, rho, deriver)
    else:  # pragma: no cover - parse_strategy rejects unknown families
        raise AssertionError(family)

    out = deriver.cancel(cnode, rnode, var_of(pivot))
    out = deriver.saturate(out)
    if not is_conflicting(out[0], rho):
        raise AnalysisError(
            f"resolve_step produced a non-conflicting constraint with {strategy}: {out[0].to_text()}"
        )
    return ResolveOutcome(out[0], out[1], deriver.steps, fallback)
