"""Strategy iteration over memoryless deterministic strategies with useful-choice pruning."""
from __future__ import annotations

import enum
from dataclasses import dataclass, field
from itertools import product
from typing import Callable, Optional

from . import polytope as P
from .model import (ADAM, AND, EVE, OR, Game, MDStrategy, ModelError, QueryTemplate,
                    classify, induced_game, is_acyclic, stopping, swap_players)
from .oracle import md_pareto, md_strategies
from .polytope import DwcPolytope, Region
from .vi import Fixpoint, recover_dq_region_2d, run_cq_vi


class SiMode(enum.Enum):
    DQ_STANDARD = "dq-standard"              # fix Eve, union of guaranteed regions
    CQ_FORALL_EXISTS = "cq-forall-exists"    # fix Adam, intersection of achievable sets


class SiUnknown(RuntimeError):
    pass


@dataclass
class SiTrace:
    visited: list = field(default_factory=list)       # MDStrategy in visiting order
    sets: list = field(default_factory=list)          # per strategy, per-state sets
    frontiers: list = field(default_factory=list)     # per round, strategies added

    def to_json(self, g: Game) -> dict:
        def strat(m):
            return {g.labels[s]: g.labels[t] for s, t in m.choice}
        return {
            "visited": [strat(m) for m in self.visited],
            "frontier_sizes": [len(f) for f in self.frontiers],
            "sets": [{g.labels[s]: (x.to_json() if isinstance(x, DwcPolytope) else x)
                      for s, x in enumerate(ss)} for ss in self.sets],
        }


def _region_leq(v1: DwcPolytope, v2: DwcPolytope) -> bool:
    """Guaranteed region of dual value v1 is inside that of v2."""
    zero = (0,) * v1.dim
    full2 = P.contains_point(v2, zero, strict=True)
    if not full2:
        return True
    full1 = P.contains_point(v1, zero, strict=True)
    return full1 and P.is_subset(v2, v1)


def useful_choices(g: Game, strat: MDStrategy, per_state_sets, s: int,
                   leq: Callable = P.is_subset) -> list:
    """Successors of s whose set is not strictly below the set of another successor."""
    if g.owners[s] is not strat.owner:
        raise ModelError(f"{g.labels[s]} is not owned by {strat.owner.name}")
    acts = g.succ[s]

    def lt(a, b):
        return leq(a, b) and not leq(b, a)
    return [t for t in acts if not any(lt(per_state_sets[t], per_state_sets[u]) for u in acts if u != t)]


def _owned(g: Game, owner) -> list:
    return [s for s in g.states() if g.owners[s] is owner and len(g.succ[s]) > 1]


def _solve_induced(h: Game, q: QueryTemplate, cap: int) -> tuple:
    """Per-state achievable sets for the single player left in h (as Eve)."""
    if is_acyclic(h):
        res = run_cq_vi(h, q, Fixpoint(cap))
        if res.status == "converged":
            return res.values
    if stopping(h):
        return tuple(md_pareto(h, q, None, s) for s in h.states())
    res = run_cq_vi(h, q, Fixpoint(cap))
    if res.status != "converged":
        raise SiUnknown("induced game did not stabilise within the cap")
    return res.values


@dataclass
class SiResult:
    value: object            # Region (DQ mode) or DwcPolytope (CQ mode)
    status: str              # "ok" or "unknown"
    trace: SiTrace
    explored: int
    total: int


def si_solve(g: Game, q: QueryTemplate, mode: SiMode = SiMode.DQ_STANDARD, cap: int = 1000,
             prune: bool = True, state: Optional[int] = None) -> SiResult:
    if not classify(g, q)[1]:
        raise ModelError("strategy iteration needs a sink query")
    if mode is SiMode.DQ_STANDARD:
        if q.connective != OR:
            raise ModelError("dq-standard mode expects a disjunctive query")
        if q.n != 2:
            raise NotImplementedError("region output is implemented for two objectives only")
        owner, leq = EVE, _region_leq
        dual_q = q.dual(g)

        def solve(h):
            # dual values: Adam as the maximiser of the complemented objectives
            return _solve_induced(swap_players(h), dual_q, cap)
    elif mode is SiMode.CQ_FORALL_EXISTS:
        if q.connective != AND:
            raise ModelError("cq-forall-exists mode expects a conjunctive query")
        owner = ADAM

        def leq(a, b):
            return P.is_subset(b, a)

        def solve(h):
            return _solve_induced(h, q, cap)
    else:
        raise ValueError(mode)

    s0 = g.initial if state is None else state
    owned = _owned(g, owner)
    total = 1
    for s in owned:
        total *= len(g.succ[s])
    trace = SiTrace()
    visited: set = set()

    def key(d):
        return MDStrategy(owner, tuple(sorted(d.items())))

    if prune:
        frontier = [key({s: g.succ[s][0] for s in owned})]
    else:
        frontier = [key(d) for d in md_strategies(g, owner)]
    status = "ok"
    while frontier:
        trace.frontiers.append(list(frontier))
        nxt = []
        for m in frontier:
            visited.add(m)
            try:
                sets = solve(induced_game(g, m.as_dict()))
            except SiUnknown:
                status = "unknown"
                sets = None
            trace.visited.append(m)
            trace.sets.append(sets)
            if sets is None or not prune:
                continue
            opts = [useful_choices(g, m, sets, s, leq) for s in owned]
            for combo in product(*opts):
                cand = key(dict(zip(owned, combo)))
                if cand not in visited and cand not in nxt and cand not in frontier:
                    nxt.append(cand)
        frontier = nxt

    if status == "unknown":
        return SiResult(None, status, trace, len(visited), total)
    if mode is SiMode.DQ_STANDARD:
        value = Region.of([p for ss in trace.sets for p in recover_dq_region_2d(ss[s0]).parts])
    else:
        value = P.intersect_all([ss[s0] for ss in trace.sets])
    return SiResult(value, status, trace, len(visited), total)
