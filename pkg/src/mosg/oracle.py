"""Brute-force semantics used as ground truth for the solvers.

Everything here enumerates strategies explicitly and evaluates the induced
finite objects exactly. It is slow on purpose and shares no code with the
family iteration beyond the polytope primitives.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product
from typing import Callable, Iterator, Optional

from gmpy2 import mpq

from . import polytope as P
from .model import (ADAM, EVE, OR, RANDOM, REACH, Game, ModelError, Owner, QueryTemplate, ThresholdQuery,
                    collapse_random_selfloops, dual_query, indicator, induced_game, is_acyclic, classify)
from .polytope import DwcPolytope
from .rational import ONE, ZERO

DEFAULT_GUARD = 10 ** 6


class GuardExceeded(RuntimeError):
    def __init__(self, count, bound):
        super().__init__(f"{count} strategies exceed the enumeration bound {bound}")
        self.count = count


@dataclass(frozen=True)
class KStepStrategy:
    owner: Owner
    k: int
    choice: tuple  # sorted pairs (history, successor)

    def as_dict(self) -> dict:
        return dict(self.choice)


# history trees ----------------------------------------------------------------

def _owned_histories(g: Game, owner: Owner, k: int) -> list:
    """Histories of at most k states ending in a non-sink `owner` state."""
    out = []
    todo = [(g.initial,)]
    while todo:
        h = todo.pop()
        s = h[-1]
        if g.is_sink(s) or len(h) > k:
            continue
        if g.owners[s] is owner:
            out.append(h)
        for t in g.succ[s]:
            todo.append(h + (t,))
    return sorted(out)


def kstep_count(g: Game, owner: Owner, k: int, reduced: bool = False) -> int:
    if not reduced:
        n = 1
        for h in _owned_histories(g, owner, k):
            n *= len(g.succ[h[-1]])
        return n

    def cnt(h):
        s = h[-1]
        if g.is_sink(s) or len(h) > k:
            return 1
        if g.owners[s] is owner:
            return sum(cnt(h + (t,)) for t in g.succ[s])
        n = 1
        for t in g.succ[s]:
            n *= cnt(h + (t,))
        return n

    return cnt((g.initial,))


def enumerate_kstep(g: Game, owner: Owner, k: int, guard: int = DEFAULT_GUARD,
                    reduced: bool = False) -> Iterator[KStepStrategy]:
    """Deterministic k-step strategies of `owner`.

    With reduced=False every reachable owned history gets a choice. With
    reduced=True only histories consistent with the strategy's own earlier
    choices do; this yields one representative per induced MDP.
    """
    count = kstep_count(g, owner, k, reduced)
    if count > guard:
        raise GuardExceeded(count, guard)
    if not reduced:
        hs = _owned_histories(g, owner, k)
        for combo in product(*(g.succ[h[-1]] for h in hs)):
            yield KStepStrategy(owner, k, tuple(zip(hs, combo)))
        return

    def rec(frontier):
        if not frontier:
            yield ()
            return
        h, rest = frontier[0], frontier[1:]
        s = h[-1]
        if g.is_sink(s) or len(h) > k:
            yield from rec(rest)
        elif g.owners[s] is owner:
            for t in g.succ[s]:
                for tail in rec(rest + [h + (t,)]):
                    yield ((h, t),) + tail
        else:
            yield from rec(rest + [h + (t,) for t in g.succ[s]])

    for ch in rec([(g.initial,)]):
        yield KStepStrategy(owner, k, tuple(sorted(ch)))


def _leaf(g: Game, q: QueryTemplate, h) -> DwcPolytope:
    vec = []
    for o in q.objectives:
        if o.kind == REACH:
            vec.append(ONE if any(s in o.states for s in h) else ZERO)
        else:
            vec.append(ONE if all(s in o.states for s in h) else ZERO)
    return DwcPolytope(q.n, (tuple(vec),))


def _tree_value(g: Game, q: QueryTemplate, h, k, fixed: dict, conv_owner: Owner) -> DwcPolytope:
    """Value of the history tree below h: fixed choices where given, convex hull for conv_owner."""
    s = h[-1]
    if g.is_sink(s) or (k is not None and len(h) > k):
        return _leaf(g, q, h)
    if g.owners[s] is RANDOM:
        return P.weighted_combination([(p, _tree_value(g, q, h + (t,), k, fixed, conv_owner))
                                       for t, p in zip(g.succ[s], g.prob[s])])
    if len(g.succ[s]) == 1:
        return _tree_value(g, q, h + g.succ[s], k, fixed, conv_owner)
    if g.owners[s] is conv_owner:
        return P.convex_union_all([_tree_value(g, q, h + (t,), k, fixed, conv_owner) for t in g.succ[s]])
    return _tree_value(g, q, h + (fixed[h],), k, fixed, conv_owner)


def induced_pareto(g: Game, strat: KStepStrategy, q: QueryTemplate, k: int | None = None) -> DwcPolytope:
    """Eve's horizon-k achievable set once Adam's k-step strategy is fixed."""
    if strat.owner is not ADAM:
        raise ModelError("induced_pareto expects an Adam strategy")
    k = strat.k if k is None else k
    return _tree_value(g, q, (g.initial,), k, strat.as_dict(), EVE)


def forall_exists_oracle(g: Game, q: QueryTemplate, k: int, guard: int = DEFAULT_GUARD) -> DwcPolytope:
    acc = None
    for strat in enumerate_kstep(g, ADAM, k, guard, reduced=True):
        v = induced_pareto(g, strat, q, k)
        acc = v if acc is None else P.intersect(acc, v)
    return acc


def standard_cq_oracle(g: Game, q: QueryTemplate, k: int) -> DwcPolytope:
    """Horizon-k standard-semantics value on the history tree (Eve convexifies, Adam intersects)."""

    def val(h):
        s = h[-1]
        if g.is_sink(s) or len(h) > k:
            return _leaf(g, q, h)
        kids = [val(h + (t,)) for t in g.succ[s]]
        if g.owners[s] is RANDOM:
            return P.weighted_combination(list(zip(g.prob[s], kids)))
        if g.owners[s] is EVE:
            return P.convex_union_all(kids)
        return P.intersect_all(kids)

    return val((g.initial,))


# standard semantics for disjunctive queries on acyclic games --------------------

def dq_standard_oracle(g: Game, tq: ThresholdQuery, guard: int = DEFAULT_GUARD) -> bool:
    if tq.template.connective != OR:
        raise ModelError("expected a disjunctive query")
    g = collapse_random_selfloops(g)
    if not classify(g, tq.template)[1]:
        raise ModelError("dq_standard_oracle needs a sink query")
    if not is_acyclic(g):
        raise ModelError("dq_standard_oracle needs an acyclic game")
    dual = dual_query(g, tq)
    depth = g.n_states + 1
    for strat in enumerate_kstep(g, EVE, depth, guard, reduced=True):
        v = _tree_value(g, dual.template, (g.initial,), None, strat.as_dict(), ADAM)
        if not P.contains_point(v, dual.thresholds, dual.strict):
            return True
    return False


# Markov chains and memoryless strategies ------------------------------------------

def _solve(a, b):
    """Exact Gaussian elimination for a square nonsingular system."""
    n = len(b)
    m = [list(row) + [rhs] for row, rhs in zip(a, b)]
    for c in range(n):
        piv = next(r for r in range(c, n) if m[r][c] != 0)
        m[c], m[piv] = m[piv], m[c]
        pv = m[c][c]
        row = [v / pv for v in m[c]]
        m[c] = row
        for r in range(n):
            if r != c and m[r][c] != 0:
                f = m[r][c]
                m[r] = [u - f * v for u, v in zip(m[r], row)]
    return [m[r][n] for r in range(n)]


def chain_reach(g: Game, choice: dict, targets) -> list:
    """P(eventually visit targets) from every state, with owned states fixed by `choice`."""
    targets = set(targets)
    n = g.n_states

    def nexts(s):
        if g.owners[s] is RANDOM:
            return list(zip(g.succ[s], g.prob[s]))
        t = choice.get(s, g.succ[s][0]) if len(g.succ[s]) > 1 else g.succ[s][0]
        return [(t, ONE)]

    # states that can reach the targets at all
    pred: dict = {s: [] for s in range(n)}
    for s in range(n):
        for t, _ in nexts(s):
            pred[t].append(s)
    can = set(targets)
    todo = list(targets)
    while todo:
        t = todo.pop()
        for s in pred[t]:
            if s not in can:
                can.add(s)
                todo.append(s)
    unknown = [s for s in range(n) if s in can and s not in targets]
    pos = {s: i for i, s in enumerate(unknown)}
    a = [[ZERO] * len(unknown) for _ in unknown]
    b = [ZERO] * len(unknown)
    for s in unknown:
        i = pos[s]
        a[i][i] += 1
        for t, p in nexts(s):
            if t in targets:
                b[i] += p
            elif t in pos:
                a[i][pos[t]] -= p
    sol = _solve(a, b) if unknown else []
    out = [ZERO] * n
    for s in targets:
        out[s] = ONE
    for s in unknown:
        out[s] = sol[pos[s]]
    return out


def objective_probs(g: Game, q: QueryTemplate, choice: dict, state: int | None = None) -> tuple:
    s0 = g.initial if state is None else state
    vals = []
    for o in q.objectives:
        if o.kind == REACH:
            vals.append(chain_reach(g, choice, o.states)[s0])
        else:
            bad = set(g.states()) - set(o.states)
            vals.append(1 - chain_reach(g, choice, bad)[s0])
    return tuple(vals)


def md_strategies(g: Game, owner: Owner, states=None) -> Iterator[dict]:
    own = [s for s in (g.states() if states is None else states)
           if g.owners[s] is owner and len(g.succ[s]) > 1]
    for combo in product(*(g.succ[s] for s in own)):
        yield dict(zip(own, combo))


def md_count(g: Game, owner: Owner) -> int:
    n = 1
    for s in g.owned_by(owner):
        n *= len(g.succ[s])
    return n


def md_pareto(g: Game, q: QueryTemplate, adam: dict | None = None, state: int | None = None) -> DwcPolytope:
    """Eve's achievable set in a stopping game once Adam plays the MD strategy `adam`.

    Uses that memoryless deterministic vertices span the achievable set of an
    MDP whose objective sets are absorbing.
    """
    adam = adam or {}
    pts = []
    for eve in md_strategies(g, EVE):
        pts.append(objective_probs(g, q, {**adam, **eve}, state))
    return DwcPolytope.from_points(pts, q.n)


def md_forall_exists(g: Game, q: QueryTemplate, state: int | None = None, guard: int = DEFAULT_GUARD) -> DwcPolytope:
    """Intersection over Adam's MD strategies of Eve's achievable sets (stopping sink games)."""
    if md_count(g, ADAM) * md_count(g, EVE) > guard:
        raise GuardExceeded(md_count(g, ADAM) * md_count(g, EVE), guard)
    acc = None
    for adam in md_strategies(g, ADAM):
        v = md_pareto(g, q, adam, state)
        acc = v if acc is None else P.intersect(acc, v)
    return acc


# finite-horizon simulation ----------------------------------------------------------

def horizon_probs(g: Game, q: QueryTemplate, strategy: Callable, steps: int) -> tuple:
    """Exact objective probabilities over `steps` transitions for a history-dependent strategy.

    `strategy(history)` returns the successor at owned states. Safety counts
    as satisfied if not violated within the horizon.
    """
    acc = [ZERO] * q.n

    def walk(h, p):
        s = h[-1]
        if len(h) > steps or g.is_sink(s):
            leaf = _leaf(g, q, h).generators[0]
            for i, v in enumerate(leaf):
                acc[i] += p * v
            return
        if g.owners[s] is RANDOM:
            for t, pr in zip(g.succ[s], g.prob[s]):
                walk(h + (t,), p * pr)
        else:
            walk(h + (strategy(h),), p)

    walk((g.initial,), ONE)
    return tuple(acc)


def ultimately_periodic_prob(u: str, v: str) -> mpq:
    """The rational with binary expansion 0.u v v v ..."""
    if not v:
        raise ValueError("period must be nonempty")
    if any(c not in "01" for c in u + v):
        raise ValueError("bit strings only")
    a = int(u, 2) if u else 0
    b = int(v, 2)
    return (mpq(a) + mpq(b, 2 ** len(v) - 1)) / 2 ** len(u)
