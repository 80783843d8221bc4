"""Value iteration: F for conjunctive queries, Φ with μ for the ∀∃ semantics.

Disjunctive queries are answered through the dual conjunctive query on the
game with swapped players.
"""
from __future__ import annotations

import time
from dataclasses import dataclass, field
from itertools import product
from typing import Optional, Sequence

from . import polytope as P
from .model import (ADAM, AND, EVE, OR, RANDOM, Game, ModelError, QueryTemplate, ThresholdQuery,
                    dual_query, goal_unfold, indicator, is_persistent, swap_players)
from .polytope import DwcPolytope, Region

DEFAULT_FAMILY_CAP = 10_000
DEFAULT_ITER_CAP = 1_000


@dataclass(frozen=True)
class Horizon:
    k: int


@dataclass(frozen=True)
class Fixpoint:
    cap: int = DEFAULT_ITER_CAP


class _Timeout(Exception):
    pass


class _Truncated(Exception):
    def __init__(self, state):
        self.state = state


@dataclass
class IterationStats:
    counts: list = field(default_factory=list)      # counts[k][s] = n^k_s
    raw_counts: list = field(default_factory=list)  # family sizes before μ
    generators: list = field(default_factory=list)  # total generator count per iteration
    wall: list = field(default_factory=list)        # seconds per iteration

    def max_count(self, k: int | None = None) -> int:
        rows = self.counts if k is None else [self.counts[k]]
        return max(max(r) for r in rows)

    def rows(self):
        for k, row in enumerate(self.counts):
            for s, c in enumerate(row):
                yield k, s, c


@dataclass
class CqResult:
    values: tuple
    status: str            # "horizon", "converged", "unconverged"
    iterations: int
    stats: IterationStats
    game: Game
    template: QueryTemplate
    previous: Optional[tuple] = None
    unfolded: Optional[list] = None

    @property
    def initial_value(self) -> DwcPolytope:
        return self.values[self.game.initial]


@dataclass
class ForallExistsResult:
    intersections: tuple
    families: tuple
    status: str            # "horizon", "converged", "unconverged", "truncated", "timeout"
    iterations: int
    stats: IterationStats
    game: Game
    template: QueryTemplate
    offending_state: Optional[int] = None
    unfolded: Optional[list] = None

    @property
    def initial_value(self) -> DwcPolytope:
        return self.intersections[self.game.initial]

    @property
    def complete(self) -> bool:
        return self.status in ("horizon", "converged")


def _prepare(g: Game, q: QueryTemplate):
    if q.connective != AND:
        raise ModelError("value iteration expects a conjunctive query")
    if is_persistent(g, q):
        return g, q, None
    ng, nq, order = goal_unfold(g, q)
    return ng, nq, order


def initial_element(g: Game, q: QueryTemplate) -> tuple:
    return tuple(DwcPolytope(q.n, (indicator(g, q, s),)) for s in g.states())


def cq_step(g: Game, x: Sequence[DwcPolytope]) -> tuple:
    out = []
    for s in g.states():
        ts = g.succ[s]
        if ts == (s,):
            out.append(x[s])
            continue
        o = g.owners[s]
        if o is ADAM:
            out.append(P.intersect_all([x[t] for t in ts]))
        elif o is EVE:
            out.append(P.convex_union_all([x[t] for t in ts]))
        else:
            out.append(P.weighted_combination([(p, x[t]) for t, p in zip(ts, g.prob[s])]))
    return tuple(out)


def _check(deadline):
    if deadline is not None and time.perf_counter() > deadline:
        raise _Timeout()


def _fold_eve(dim, fams, deadline):
    acc = [None]
    for fam in fams:
        nxt = set()
        for a in acc:
            _check(deadline)
            for b in fam:
                nxt.add(b if a is None else P.convex_union(a, b))
        acc = nxt
    return acc


def _fold_random(dim, fams, probs, deadline):
    # partial weighted sums are kept as (unnormalised) dwc point sets
    acc = [None]
    for fam, p in zip(fams, probs):
        scaled = [DwcPolytope(dim, tuple(tuple(p * c for c in g) for g in b.generators)) for b in fam]
        nxt = set()
        for a in acc:
            _check(deadline)
            for b in scaled:
                if a is None:
                    nxt.add(b)
                else:
                    pts = [tuple(u + v for u, v in zip(ga, gb)) for ga in a.generators for gb in b.generators]
                    nxt.add(DwcPolytope._of(dim, pts))
        acc = nxt
    return acc


def dq_step(g: Game, fam: Sequence[tuple], family_cap: int | None = None, deadline=None) -> tuple:
    """One application of Φ; families are returned deduplicated and sorted."""
    dim = next(iter(fam[0])).dim
    out = []
    for s in g.states():
        ts = g.succ[s]
        if ts == (s,):
            out.append(fam[s])
            continue
        fams = [fam[t] for t in ts]
        if family_cap is not None:
            size = 1
            for f in fams:
                size = size * len(f) if g.owners[s] is not ADAM else size + len(f)
            if size > family_cap * family_cap:
                raise _Truncated(s)
        o = g.owners[s]
        if o is ADAM:
            res = set()
            for f in fams:
                res.update(f)
        elif o is EVE:
            res = _fold_eve(dim, fams, deadline)
        else:
            res = _fold_random(dim, fams, g.prob[s], deadline)
        res = P.canon_family(res)
        if family_cap is not None and len(res) > family_cap:
            raise _Truncated(s)
        out.append(res)
    return tuple(out)


def run_cq_vi(g: Game, q: QueryTemplate, mode=Fixpoint(), deadline=None) -> CqResult:
    g, q, order = _prepare(g, q)
    x = initial_element(g, q)
    stats = IterationStats()
    stats.counts.append([1] * g.n_states)
    stats.generators.append(sum(len(v.generators) for v in x))
    stats.wall.append(0.0)
    limit = mode.k if isinstance(mode, Horizon) else mode.cap
    prev = None
    for it in range(1, limit + 1):
        t0 = time.perf_counter()
        nx = cq_step(g, x)
        stats.counts.append([1] * g.n_states)
        stats.generators.append(sum(len(v.generators) for v in nx))
        stats.wall.append(time.perf_counter() - t0)
        if isinstance(mode, Fixpoint) and nx == x:
            return CqResult(x, "converged", it - 1, stats, g, q, None, order)
        prev, x = x, nx
    if isinstance(mode, Horizon):
        return CqResult(x, "horizon", limit, stats, g, q, prev, order)
    return CqResult(x, "unconverged", limit, stats, g, q, prev, order)


def run_forall_exists_vi(g: Game, q: QueryTemplate, mode=Fixpoint(), prune: bool = True,
                         family_cap: int = DEFAULT_FAMILY_CAP, timeout: float | None = None,
                         on_iteration=None) -> ForallExistsResult:
    """Family iteration: iterate Φ (and μ when pruning) from {X⁰}; intersect at the end."""
    g, q, order = _prepare(g, q)
    deadline = None if timeout is None else time.perf_counter() + timeout
    fam = tuple((x,) for x in initial_element(g, q))
    stats = IterationStats()
    stats.counts.append([1] * g.n_states)
    stats.raw_counts.append([1] * g.n_states)
    stats.generators.append(g.n_states)
    stats.wall.append(0.0)
    limit = mode.k if isinstance(mode, Horizon) else mode.cap
    status, done, bad = None, 0, None
    for it in range(1, limit + 1):
        t0 = time.perf_counter()
        try:
            nf = dq_step(g, fam, family_cap, deadline)
            raw = [len(f) for f in nf]
            if prune:
                nf = tuple(f if len(f) == 1 else P.min_filter(f) for f in nf)
                _check(deadline)
        except _Timeout:
            status = "timeout"
            break
        except _Truncated as tr:
            status, bad = "truncated", tr.state
            break
        stats.counts.append([len(f) for f in nf])
        stats.raw_counts.append(raw)
        stats.generators.append(sum(len(p.generators) for f in nf for p in f))
        stats.wall.append(time.perf_counter() - t0)
        if on_iteration is not None:
            on_iteration(it, nf)
        if isinstance(mode, Fixpoint) and nf == fam:
            status = "converged"
            break
        fam = nf
        done = it
    if status is None:
        status = "horizon" if isinstance(mode, Horizon) else "unconverged"
    inter = tuple(P.intersect_all(f) for f in fam)
    return ForallExistsResult(inter, fam, status, done, stats, g, q, bad, order)


# disjunctive queries ------------------------------------------------------------

def dual_forall_exists(g: Game, template: QueryTemplate, mode=Fixpoint(), prune=True, **kw) -> ForallExistsResult:
    """∀∃ value of the dual conjunctive query on the player-swapped game."""
    if template.connective != OR:
        raise ModelError("expected a disjunctive query")
    return run_forall_exists_vi(swap_players(g), template.dual(g), mode, prune, **kw)


def recover_dq_region_2d(v: DwcPolytope) -> Region:
    """{x : no z in v with z > 1 - x}, one part per facet of v."""
    if v.dim != 2:
        raise NotImplementedError("region recovery is implemented for two objectives only")
    parts = []
    for a, b in v.constraints:
        c = a[0] + a[1] - b
        part = P.halfspace_in_box(a, c)
        if part is not None:
            parts.append(part)
    if not parts:
        raise AssertionError("a bounded polytope always has facets")
    return Region.of(parts)


@dataclass
class DqDecision:
    achievable: Optional[bool]
    status: str
    dual_value: Optional[DwcPolytope] = None

    def __bool__(self):
        if self.achievable is None:
            raise ValueError(f"undecided ({self.status})")
        return self.achievable


def dq_achievable_point(g: Game, tq: ThresholdQuery, mode=Fixpoint(), prune=True, state: int | None = None,
                        **kw) -> DqDecision:
    if state is not None:
        g = g.with_initial(state)
    res = dual_forall_exists(g, tq.template, mode, prune, **kw)
    if not res.complete:
        return DqDecision(None, res.status, None)
    dual = dual_query(g, tq)
    v = res.initial_value
    hit = P.contains_point(v, dual.thresholds, dual.strict)
    return DqDecision(not hit, res.status, v)


@dataclass
class DqRegionResult:
    region: Optional[Region]
    dual_value: DwcPolytope
    status: str
    result: ForallExistsResult


def dq_region(g: Game, template: QueryTemplate, mode=Fixpoint(), prune=True, state: int | None = None,
              **kw) -> DqRegionResult:
    if state is not None:
        g = g.with_initial(state)
    res = dual_forall_exists(g, template, mode, prune, **kw)
    v = res.initial_value
    region = recover_dq_region_2d(v) if res.complete and v.dim == 2 else None
    return DqRegionResult(region, v, res.status, res)
