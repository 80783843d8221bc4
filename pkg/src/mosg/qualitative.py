"""Qualitative (probability-one) questions.

`almost_sure_region` is the classic nested attractor construction.
`alternating_safety_det` decides qualitative safety disjunctions when both
players are restricted to deterministic strategies.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Optional

from .model import (ADAM, EVE, OR, RANDOM, SAFETY, Game, ModelError, Objective, QueryTemplate,
                    ThresholdQuery, binarize, classify, lift_template)
from .oracle import DEFAULT_GUARD, enumerate_kstep


@dataclass(frozen=True)
class WinningRegion:
    objective: Objective
    states: frozenset

    def __contains__(self, s):
        return s in self.states


def _safety_region(g: Game, safe: frozenset) -> frozenset:
    w = set(safe)
    changed = True
    while changed:
        changed = False
        for s in list(w):
            ts = g.succ[s]
            ok = any(t in w for t in ts) if g.owners[s] is EVE else all(t in w for t in ts)
            if not ok:
                w.discard(s)
                changed = True
    return frozenset(w)


def _reach_region(g: Game, target: frozenset) -> frozenset:
    allst = set(g.states())
    w = set(allst)
    while True:
        # states of w from which T is reached with positive probability without leaving w
        pos = set(target & w)
        changed = True
        while changed:
            changed = False
            for s in w - pos:
                ts = g.succ[s]
                if g.owners[s] is ADAM:
                    ok = all(t in pos for t in ts)
                else:
                    ok = any(t in pos for t in ts)
                if ok:
                    pos.add(s)
                    changed = True
        # Adam's positive attractor to the losing part
        lose = (allst - w) | (w - pos)
        changed = True
        while changed:
            changed = False
            for s in allst - lose - target:
                ts = g.succ[s]
                if g.owners[s] is EVE:
                    ok = all(t in lose for t in ts)
                else:
                    ok = any(t in lose for t in ts)
                if ok:
                    lose.add(s)
                    changed = True
        nw = allst - lose
        if nw == w:
            return frozenset(w)
        w = nw


def almost_sure_region(g: Game, obj: Objective) -> WinningRegion:
    if obj.kind == SAFETY:
        return WinningRegion(obj, _safety_region(g, obj.states))
    return WinningRegion(obj, _reach_region(g, obj.states))


def _require_qualitative(tq: ThresholdQuery):
    if tq.template.connective != OR:
        raise ModelError("expected a disjunctive query")
    if any(x != 1 for x in tq.thresholds) or any(tq.strict):
        raise ModelError("qualitative queries need all thresholds equal to 1 (non-strict)")


def solve_qual_dq(g: Game, tq, state: int | None = None) -> tuple:
    """Whether some single objective is won almost surely; returns (bool, witness index)."""
    if isinstance(tq, QueryTemplate):
        tq = ThresholdQuery(tq, (1,) * tq.n)
    _require_qualitative(tq)
    s0 = g.initial if state is None else state
    for i, o in enumerate(tq.template.objectives):
        if s0 in almost_sure_region(g, o).states:
            return True, i
    return False, None


# deterministic strategies, qualitative safety ----------------------------------------

def _check_safety_sink(g: Game, q: QueryTemplate):
    if q.connective != OR or any(o.kind != SAFETY for o in q.objectives):
        raise ModelError("expected a disjunction of safety objectives")
    if not classify(g, q)[1]:
        raise ModelError("expected a sink query")


def _marker(g: Game, q: QueryTemplate):
    unsafe = [o.relevant(g) for o in q.objectives]
    masks = []
    for s in g.states():
        m = 0
        for i, u in enumerate(unsafe):
            if s in u:
                m |= 1 << i
        masks.append(m)
    return masks


def reach_as_safety(g: Game, q: QueryTemplate) -> QueryTemplate:
    """Reach sink objectives T become safety objectives T ∪ (S \\ Sinks).

    On stopping games both ask the same qualitative question: a play avoids
    the other sinks iff it ends in T.
    """
    if not classify(g, q)[1]:
        raise ModelError("expected a sink query")
    inner = frozenset(g.states()) - g.sinks()
    objs = tuple(o if o.kind == SAFETY else Objective(SAFETY, o.states | inner) for o in q.objectives)
    return QueryTemplate(q.connective, objs)


def alternating_safety_det(g: Game, q, method: str = "tree") -> bool:
    """∃σ∀τ ⋁ P(□T_i) = 1 with deterministic strategies on both sides.

    The complement (Adam reaches every unsafe set with positive probability)
    is searched over |S|-step simulations of the binarized game.

    method="stack" runs the depth-first search that explores Random branches
    one after the other with a stack of pending histories. In that search
    Eve's moves after a backtrack may depend on what Adam did in an earlier
    branch, which her actual strategy cannot see; it can therefore report
    "achievable" where Eve has no such strategy. method="tree" (default)
    evaluates the same |S|-step tree with information-respecting
    composition: Eve's choices in sibling branches are fixed before Adam's.
    """
    if isinstance(q, ThresholdQuery):
        _require_qualitative(q)
        q = q.template
    _check_safety_sink(g, q)
    bg, origin = binarize(g)
    bq = lift_template(q, origin)
    if method == "stack":
        return not _stack_search(bg, bq)
    if method == "tree":
        return not _tree_search(bg, bq)
    raise ValueError(f"unknown method {method!r}")


def _stack_search(g: Game, q: QueryTemplate) -> bool:
    """True iff the complement is accepted by the stack-based search."""
    mark = _marker(g, q)
    full = (1 << q.n) - 1
    bound = g.n_states

    def solve(h, stack, bits):
        if bits == full:
            return True
        s = h[-1]
        if len(h) > bound or g.is_sink(s):
            if not stack:
                return False
            h2 = stack[-1]
            t = g.succ[h2[-1]][1]
            return solve(h2 + (t,), stack[:-1], bits | mark[t])
        ts = g.succ[s]
        if len(ts) == 1:
            return solve(h + ts, stack, bits | mark[ts[0]])
        o = g.owners[s]
        if o is EVE:
            return all(solve(h + (t,), stack, bits | mark[t]) for t in ts)
        if o is ADAM:
            return any(solve(h + (t,), stack, bits | mark[t]) for t in ts)
        return solve(h + (ts[0],), stack + (h,), bits | mark[ts[0]])

    s0 = g.initial
    return solve((s0,), (), mark[s0])


def _maximal(masks) -> frozenset:
    ms = set(masks)
    return frozenset(m for m in ms if not any(m != o and m | o == o for o in ms))


def _le(a: frozenset, b: frozenset) -> bool:
    # every Adam outcome in a is covered by one in b
    return all(any(x | y == y for y in b) for x in a)


def _minimal(opts) -> list:
    opts = list(set(opts))
    return [a for a in opts if not any(b != a and _le(b, a) for b in opts)]


def _tree_search(g: Game, q: QueryTemplate) -> bool:
    """True iff for every Eve strategy Adam covers all unsafe sets positively."""
    mark = _marker(g, q)
    full = (1 << q.n) - 1
    bound = g.n_states

    def opts(h, bits):
        # list of options for Eve; each option is Adam's set of reachable masks
        s = h[-1]
        if len(h) > bound or g.is_sink(s) or bits == full:
            return [frozenset([bits])]
        ts = g.succ[s]
        kids = [opts(h + (t,), bits | mark[t]) for t in ts]
        o = g.owners[s]
        if len(ts) == 1:
            return kids[0]
        if o is EVE:
            return _minimal([m for k in kids for m in k])
        if o is ADAM:
            acc = kids[0]
            for k in kids[1:]:
                acc = _minimal([_maximal(a | b) for a in acc for b in k])
            return acc
        acc = kids[0]
        for k in kids[1:]:
            acc = _minimal([_maximal(x | y for x in a for y in b) for a in acc for b in k])
        return acc

    s0 = g.initial
    return all(full in m for m in opts((s0,), mark[s0]))


def det_qual_bruteforce(g: Game, q: QueryTemplate, steps: int | None = None, guard: int = DEFAULT_GUARD) -> bool:
    """Exhaustive search over Eve's deterministic strategies for a qualitative sink DQ.

    For each Eve strategy on the bounded history tree, Adam's reachable sets of
    violated objectives are computed exactly; Eve wins if Adam cannot violate
    every disjunct. Safety disjunct i is violated by reaching an unsafe state
    with positive probability, a reach disjunct by ending (with positive
    probability) in a sink outside its target.
    """
    if q.connective != OR or not classify(g, q)[1]:
        raise ModelError("expected a disjunctive sink query")
    steps = g.n_states if steps is None else steps
    full = (1 << q.n) - 1

    def bad_mask(s):
        m = 0
        for i, o in enumerate(q.objectives):
            if o.kind == SAFETY:
                if s not in o.states:
                    m |= 1 << i
            elif g.is_sink(s) and s not in o.states:
                m |= 1 << i
        return m

    def leaf_mask(s, depth):
        m = bad_mask(s)
        if not g.is_sink(s):
            # a reach disjunct fails on plays still running at the horizon
            for i, o in enumerate(q.objectives):
                if o.kind != SAFETY:
                    m |= 1 << i
        return m

    def adam_masks(h, bits, sigma):
        s = h[-1]
        if len(h) > steps or g.is_sink(s):
            return {bits | leaf_mask(s, len(h))}
        ts = g.succ[s]
        o = g.owners[s]
        if o is RANDOM:
            acc = {0}
            for t in ts:
                sub = adam_masks(h + (t,), bits | bad_mask(t), sigma)
                acc = {a | b for a in acc for b in sub}
            return acc
        if o is EVE and len(ts) > 1:
            t = sigma[h]
            return adam_masks(h + (t,), bits | bad_mask(t), sigma)
        out = set()
        for t in ts:
            out |= adam_masks(h + (t,), bits | bad_mask(t), sigma)
        return out

    s0 = g.initial
    for strat in enumerate_kstep(g, EVE, steps, guard, reduced=True):
        if full not in adam_masks((s0,), bad_mask(s0), strat.as_dict()):
            return True
    return False
