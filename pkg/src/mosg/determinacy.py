"""Determinacy: certificate checking, the Adam-first criterion, and a fixpoint test."""
from __future__ import annotations

from dataclasses import dataclass, field, replace
from itertools import product
from typing import Optional

from . import polytope as P
from .model import (ADAM, AND, EVE, OR, RANDOM, REACH, SAFETY, Game, ModelError, QueryTemplate,
                    classify, is_persistent, goal_unfold, stopping, swap_players)
from .oracle import DEFAULT_GUARD, GuardExceeded, md_count, md_forall_exists
from .polytope import DwcPolytope
from .vi import Fixpoint, cq_step, dq_step, initial_element, run_cq_vi, run_forall_exists_vi


@dataclass
class CertificateReport:
    closure_phi: bool
    initial_member: bool
    cond1_intersection_closed: bool
    cond2_conv_distributes: bool        # at Eve states
    cond3_weighted_distributes: bool    # at Random states
    cond2_at_random: bool
    cond3_at_eve: bool
    witnesses: dict = field(default_factory=dict)

    @property
    def verdict(self) -> bool:
        return (self.closure_phi and self.initial_member and self.cond1_intersection_closed
                and self.cond2_conv_distributes and self.cond3_weighted_distributes)

    @property
    def strong_verdict(self) -> bool:
        """Also holds when conditions 2 and 3 are demanded at every Eve and Random state."""
        return self.verdict and self.cond2_at_random and self.cond3_at_eve


def _as_family(fam) -> tuple:
    return tuple(P.canon_family(f) for f in fam)


def check_certificate(g: Game, q: QueryTemplate, fam) -> CertificateReport:
    if any(len(g.succ[s]) > 2 for s in g.states()):
        raise ModelError("certificate checking needs a binarized game (at most two successors); use binarize")
    fam = _as_family(fam)
    if len(fam) != g.n_states or any(not f for f in fam):
        raise ModelError("a certificate needs a nonempty family for every state")
    wit: dict = {}
    members = [set(f) for f in fam]

    step = dq_step(g, fam)
    closure = True
    for s in g.states():
        for x in step[s]:
            if x not in members[s]:
                closure = False
                wit.setdefault("closure_phi", (g.labels[s], x))
                break
    # X⁰ counts as a member when some member dominates it; a stabilised
    # Φ-limit has usually dropped the bare origin at inner states.
    x0 = initial_element(g, q)
    low = [s for s in g.states() if not any(P.is_subset(x0[s], x) for x in fam[s])]
    init = not low
    if low:
        wit["initial_member"] = g.labels[low[0]]

    cond1 = True
    checked = set()
    for s in g.states():
        if g.is_sink(s) or g.owners[s] is ADAM:
            continue
        for t in g.succ[s]:
            if t in checked:
                continue
            checked.add(t)
            for a, b in product(fam[t], repeat=2):
                if P.intersect(a, b) not in members[t]:
                    cond1 = False
                    wit.setdefault("cond1", (g.labels[t], a, b))
                    break

    def conv_ok(s, i):
        X = fam[g.succ[s][i]]
        Y = fam[g.succ[s][1 - i]]
        for x in X:
            for y1, y2 in product(Y, repeat=2):
                lhs = P.intersect(P.convex_union(x, y1), P.convex_union(x, y2))
                rhs = P.convex_union(x, P.intersect(y1, y2))
                if lhs != rhs:
                    return (g.labels[s], x, y1, y2)
        return None

    def weighted_ok(s, i, p):
        X = fam[g.succ[s][i]]
        Y = fam[g.succ[s][1 - i]]
        for x in X:
            for y1, y2 in product(Y, repeat=2):
                lhs = P.intersect(P.weighted_combination([(p, x), (1 - p, y1)]),
                                  P.weighted_combination([(p, x), (1 - p, y2)]))
                rhs = P.weighted_combination([(p, x), (1 - p, P.intersect(y1, y2))])
                if lhs != rhs:
                    return (g.labels[s], x, y1, y2)
        return None

    c2e = c2r = c3r = c3e = True
    for s in g.states():
        if g.is_sink(s) or len(g.succ[s]) != 2 or g.owners[s] is ADAM:
            continue
        if g.owners[s] is RANDOM:
            probs = g.prob[s]
        else:
            probs = (P.ONE / 2, P.ONE / 2)
        for i in (0, 1):
            w2 = conv_ok(s, i)
            w3 = weighted_ok(s, i, probs[i])
            if g.owners[s] is EVE:
                if w2:
                    c2e = False
                    wit.setdefault("cond2", w2)
                if w3:
                    c3e = False
                    wit.setdefault("cond3_at_eve", w3)
            else:
                if w3:
                    c3r = False
                    wit.setdefault("cond3", w3)
                if w2:
                    c2r = False
                    wit.setdefault("cond2_at_random", w2)
    return CertificateReport(closure, init, cond1, c2e, c3r, c2r, c3e, wit)


def five_curves_family(g: Game, n: int = 2) -> tuple:
    if n != 2:
        raise ModelError("the five-curve family is two-dimensional")
    fam = (P.origin(2), P.from_points([(0, 1)]), P.from_points([(1, 0)]),
           P.from_points([(0, 1), (1, 0)]), P.full_box(2))
    return tuple(P.canon_family(fam) for _ in g.states())


@dataclass
class LimitFamily:
    families: Optional[tuple]
    status: str
    iterations: int


def limit_family(g: Game, q: QueryTemplate, cap: int = 1000) -> LimitFamily:
    fam = tuple((x,) for x in initial_element(g, q))
    for it in range(1, cap + 1):
        nf = dq_step(g, fam)
        if nf == fam:
            return LimitFamily(fam, "converged", it - 1)
        fam = nf
    return LimitFamily(None, "unconverged", cap)


def adam_first_check(g: Game) -> bool:
    """No Eve or Random state reaches an Adam state."""
    adam = set(g.owned_by(ADAM))
    seen = set()
    todo = [s for s in g.states() if g.owners[s] is not ADAM]
    for s in todo:
        seen.add(s)
    starts = list(todo)
    # forward closure from every non-Adam state, one step at least
    reach = set()
    for s in starts:
        for t in g.succ[s]:
            reach.add(t)
    frontier = list(reach)
    while frontier:
        s = frontier.pop()
        if g.owners[s] is ADAM:
            return False
        for t in g.succ[s]:
            if t not in reach:
                reach.add(t)
                frontier.append(t)
    return not (reach & adam)


def restrict_reachable(g: Game, q: QueryTemplate) -> tuple:
    keep = g.reachable()
    pos = {s: i for i, s in enumerate(keep)}
    ng = Game(tuple(g.owners[s] for s in keep),
              tuple(tuple(pos[t] for t in g.succ[s]) for s in keep),
              tuple(g.prob[s] for s in keep), pos[g.initial],
              tuple(g.labels[s] for s in keep), tuple(g.ids[s] for s in keep))
    objs = tuple(type(o)(o.kind, frozenset(pos[s] for s in o.states if s in pos)) for o in q.objectives)
    return ng, QueryTemplate(q.connective, objs), keep


@dataclass
class DeterminacyVerdict:
    verdict: str          # "determined", "not_determined", "unknown"
    method: str
    value: Optional[tuple] = None
    detail: str = ""


def decide_determinacy(g: Game, template: QueryTemplate, cap: int = 1000,
                       guard: int = DEFAULT_GUARD) -> DeterminacyVerdict:
    """Fixpoint test: val∀∃ is determined iff it is a fixpoint of F (stopping games).

    CQs are tested directly, DQs through their dual CQ on the swapped game. The verdict covers every state
    reachable from the initial one.
    """
    if template.connective == AND:
        gg, qq = g, template
    else:
        gg, qq = swap_players(g), template.dual(g)
    if not is_persistent(gg, qq):
        gg, qq, _ = goal_unfold(gg, qq)
    gg, qq, _ = restrict_reachable(gg, qq)

    res = run_forall_exists_vi(gg, qq, Fixpoint(cap), prune=True)
    if res.status == "converged":
        w = res.intersections
        fw = cq_step(gg, w)
        if fw == w:
            return DeterminacyVerdict("determined", "family-fixpoint", w)
        a = run_cq_vi(gg, qq, Fixpoint(cap))
        if a.status == "converged":
            bad = [gg.labels[s] for s in gg.states() if a.values[s] != w[s]]
            return DeterminacyVerdict("not_determined", "family-fixpoint", w,
                                      f"val∀∃ differs from the standard value at {bad}")
        return DeterminacyVerdict("unknown", "family-fixpoint", w, "F did not stabilise")

    if classify(gg, qq)[1] and stopping(gg):
        try:
            w = tuple(md_forall_exists(gg, qq, s, guard) for s in gg.states())
        except GuardExceeded as ex:
            return DeterminacyVerdict("unknown", "md-enumeration", None, str(ex))
        fw = cq_step(gg, w)
        if fw == w:
            return DeterminacyVerdict("determined", "md-enumeration", w,
                                      "family iteration does not stabilise; exact val∀∃ from memoryless strategies")
        bad = [gg.labels[s] for s in gg.states() if fw[s] != w[s]]
        return DeterminacyVerdict("not_determined", "md-enumeration", w, f"F moves val∀∃ at {bad}")
    return DeterminacyVerdict("unknown", "none", None, f"family iteration status {res.status}; game not stopping")
