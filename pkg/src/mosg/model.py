"""Games, queries, validation and the structural transforms on them."""
from __future__ import annotations

import enum
import json
from collections import deque
from dataclasses import dataclass, field, replace
from typing import Iterable, Sequence

from gmpy2 import mpq

from .rational import ONE, ZERO, fmt_q, to_q


class ModelError(ValueError):
    pass


class Owner(enum.Enum):
    EVE = "eve"
    ADAM = "adam"
    RANDOM = "random"

    def swapped(self) -> "Owner":
        if self is Owner.EVE:
            return Owner.ADAM
        if self is Owner.ADAM:
            return Owner.EVE
        return self


EVE, ADAM, RANDOM = Owner.EVE, Owner.ADAM, Owner.RANDOM


@dataclass(frozen=True)
class Game:
    """A turn-based stochastic game over states 0..N-1.

    `succ[s]` lists the actions (Eve/Adam) or the support (Random); for Random
    states `prob[s]` is aligned with `succ[s]`, for owned states it is empty.
    """

    owners: tuple
    succ: tuple
    prob: tuple
    initial: int = 0
    labels: tuple = ()
    ids: tuple = ()

    def __post_init__(self):
        n = len(self.owners)
        if not self.labels:
            object.__setattr__(self, "labels", tuple(f"s{i}" for i in range(n)))
        if not self.ids:
            object.__setattr__(self, "ids", tuple(str(i) for i in range(n)))

    @property
    def n_states(self) -> int:
        return len(self.owners)

    def states(self):
        return range(len(self.owners))

    def is_sink(self, s: int) -> bool:
        return self.succ[s] == (s,)

    def sinks(self) -> frozenset:
        return frozenset(s for s in self.states() if self.is_sink(s))

    def with_initial(self, s: int) -> "Game":
        return replace(self, initial=s)

    def index_of(self, key) -> int:
        """Resolve an external id or label to a state index."""
        key = str(key)
        if key in self.ids:
            return self.ids.index(key)
        if key in self.labels:
            return self.labels.index(key)
        raise ModelError(f"unknown state {key!r}")

    def owned_by(self, o: Owner):
        return [s for s in self.states() if self.owners[s] is o]

    def edges(self, s: int):
        if self.owners[s] is RANDOM:
            return list(zip(self.succ[s], self.prob[s]))
        return [(t, None) for t in self.succ[s]]

    def reachable(self, start: int | None = None) -> list:
        start = self.initial if start is None else start
        seen = {start}
        todo = [start]
        while todo:
            s = todo.pop()
            for t in self.succ[s]:
                if t not in seen:
                    seen.add(t)
                    todo.append(t)
        return sorted(seen)

    def is_deterministic(self) -> bool:
        """No genuine randomness: every Random state has a single successor."""
        return all(len(self.succ[s]) == 1 for s in self.owned_by(RANDOM))

    def describe(self) -> str:
        lines = []
        for s in self.states():
            es = ", ".join(self.labels[t] + (f":{p}" if p is not None else "") for t, p in self.edges(s))
            lines.append(f"{self.labels[s]} [{self.owners[s].value}] -> {es}")
        return "\n".join(lines)


class GameBuilder:
    """Incremental construction by state name; used by the corpus."""

    def __init__(self):
        self.names: list = []
        self.owner: list = []
        self.out: dict = {}

    def state(self, name: str, owner: Owner) -> int:
        if name in self.names:
            raise ModelError(f"duplicate state {name}")
        self.names.append(name)
        self.owner.append(owner)
        self.out[len(self.names) - 1] = []
        return len(self.names) - 1

    def idx(self, name) -> int:
        return name if isinstance(name, int) else self.names.index(name)

    def edge(self, a, b, p=None):
        self.out[self.idx(a)].append((self.idx(b), None if p is None else to_q(p)))

    def sink(self, name: str, owner: Owner = RANDOM) -> int:
        s = self.state(name, owner)
        self.edge(s, s, 1 if owner is RANDOM else None)
        return s

    def build(self, initial=0) -> Game:
        succ, prob = [], []
        for s in range(len(self.names)):
            es = self.out[s]
            if self.owner[s] is RANDOM:
                merged: dict = {}
                for t, p in es:
                    merged[t] = merged.get(t, ZERO) + (ONE if p is None else p)
                succ.append(tuple(merged))
                prob.append(tuple(merged.values()))
            else:
                ts = []
                for t, _ in es:
                    if t not in ts:
                        ts.append(t)
                succ.append(tuple(ts))
                prob.append(())
        return Game(tuple(self.owner), tuple(succ), tuple(prob), self.idx(initial),
                    tuple(self.names), tuple(self.names))


# queries ---------------------------------------------------------------------

REACH, SAFETY = "reach", "safety"
AND, OR = "and", "or"


@dataclass(frozen=True)
class Objective:
    kind: str
    states: frozenset

    def __post_init__(self):
        if self.kind not in (REACH, SAFETY):
            raise ModelError(f"unknown objective kind {self.kind!r}")
        object.__setattr__(self, "states", frozenset(self.states))

    def relevant(self, g: Game) -> frozenset:
        """States whose visit decides the objective: targets, or unsafe states."""
        if self.kind == REACH:
            return self.states
        return frozenset(g.states()) - self.states

    def dual(self, g: Game) -> "Objective":
        comp = frozenset(g.states()) - self.states
        return Objective(SAFETY if self.kind == REACH else REACH, comp)


def reach(states) -> Objective:
    return Objective(REACH, frozenset(states))


def safety(states) -> Objective:
    return Objective(SAFETY, frozenset(states))


@dataclass(frozen=True)
class QueryTemplate:
    connective: str
    objectives: tuple

    def __post_init__(self):
        if self.connective not in (AND, OR):
            raise ModelError(f"unknown connective {self.connective!r}")
        object.__setattr__(self, "objectives", tuple(self.objectives))
        if not self.objectives:
            raise ModelError("a query needs at least one objective")

    @property
    def n(self) -> int:
        return len(self.objectives)

    def dual(self, g: Game) -> "QueryTemplate":
        return QueryTemplate(OR if self.connective == AND else AND,
                             tuple(o.dual(g) for o in self.objectives))


def cq(*objs) -> QueryTemplate:
    return QueryTemplate(AND, objs)


def dq(*objs) -> QueryTemplate:
    return QueryTemplate(OR, objs)


@dataclass(frozen=True)
class ThresholdQuery:
    template: QueryTemplate
    thresholds: tuple
    strict: tuple = ()

    def __post_init__(self):
        object.__setattr__(self, "thresholds", tuple(to_q(x) for x in self.thresholds))
        if not self.strict:
            object.__setattr__(self, "strict", (False,) * len(self.thresholds))
        object.__setattr__(self, "strict", tuple(bool(b) for b in self.strict))
        if len(self.thresholds) != self.template.n or len(self.strict) != self.template.n:
            raise ModelError("threshold vector length differs from the number of objectives")
        for x in self.thresholds:
            if x < 0 or x > 1:
                raise ModelError(f"threshold out of [0,1]: {x}")


@dataclass(frozen=True)
class MDStrategy:
    owner: Owner
    choice: tuple  # pairs (state, successor), sorted

    def __getitem__(self, s):
        return dict(self.choice)[s]

    def as_dict(self) -> dict:
        return dict(self.choice)


# validation and classification ------------------------------------------------

def validate(g: Game) -> list:
    diags = []
    n = g.n_states
    if len(g.succ) != n or len(g.prob) != n:
        return ["game: successor/probability tables do not match the state list"]
    if not 0 <= g.initial < n:
        diags.append(f"initial: unknown state {g.initial}")
    if len(set(g.ids)) != len(g.ids):
        diags.append("game: duplicate state ids")
    for s in g.states():
        name = g.labels[s]
        ts = g.succ[s]
        if not ts:
            diags.append(f"state {name}: no successors")
            continue
        if any(not (0 <= t < n) for t in ts):
            diags.append(f"state {name}: successor id does not exist")
            continue
        if len(set(ts)) != len(ts):
            diags.append(f"state {name}: duplicate successor")
        if g.owners[s] is RANDOM:
            ps = g.prob[s]
            if len(ps) != len(ts):
                diags.append(f"state {name}: probability list length mismatch")
                continue
            if any(p <= 0 for p in ps):
                diags.append(f"state {name}: nonpositive probability")
            if sum(ps, ZERO) != 1:
                diags.append(f"state {name}: distribution sum ≠ 1 (got {sum(ps, ZERO)})")
        elif g.prob[s]:
            diags.append(f"state {name}: owned state carries probabilities")
    return diags


def validate_query(g: Game, q: QueryTemplate) -> list:
    diags = []
    for i, o in enumerate(q.objectives):
        bad = [s for s in o.states if not (0 <= s < g.n_states)]
        if bad:
            diags.append(f"objective {i}: unknown states {bad}")
    return diags


def classify(g: Game, q: QueryTemplate) -> tuple:
    sinks = g.sinks()
    ok = all(o.relevant(g) <= sinks for o in q.objectives)
    return sinks, ok


def is_persistent(g: Game, q: QueryTemplate) -> bool:
    """Every relevant set is closed under successors (sink queries are persistent)."""
    for o in q.objectives:
        rel = o.relevant(g)
        for s in rel:
            if any(t not in rel for t in g.succ[s]):
                return False
    return True


def indicator(g: Game, q: QueryTemplate, s: int) -> tuple:
    """Coordinate i is 1 iff s is in the set of objective i (target or safe set)."""
    return tuple(ONE if s in o.states else ZERO for o in q.objectives)


# transforms -------------------------------------------------------------------

def swap_players(g: Game) -> Game:
    return replace(g, owners=tuple(o.swapped() for o in g.owners))


def dual_query(g: Game, tq: ThresholdQuery) -> ThresholdQuery:
    return ThresholdQuery(tq.template.dual(g), tuple(1 - x for x in tq.thresholds),
                          tuple(not b for b in tq.strict))


def dualize_dq(g: Game, tq: ThresholdQuery) -> tuple:
    if tq.template.connective != OR:
        raise ModelError("dualize_dq expects a disjunctive query")
    return swap_players(g), dual_query(g, tq)


def goal_unfold(g: Game, q: QueryTemplate) -> tuple:
    """Product with visited-bits; returns (game, template, [(orig_state, bits)])."""
    rel = [o.relevant(g) for o in q.objectives]

    def mark(bits, t):
        return tuple(b or (t in r) for b, r in zip(bits, rel))

    start = (g.initial, mark((False,) * q.n, g.initial))
    index = {start: 0}
    order = [start]
    todo = deque([start])
    edges: dict = {}
    while todo:
        node = todo.popleft()
        s, bits = node
        out = []
        for t in g.succ[s]:
            nxt = (t, mark(bits, t))
            if nxt not in index:
                index[nxt] = len(order)
                order.append(nxt)
                todo.append(nxt)
            out.append(index[nxt])
        edges[index[node]] = out
    owners = tuple(g.owners[s] for s, _ in order)
    succ = tuple(tuple(edges[i]) for i in range(len(order)))
    prob = tuple(g.prob[s] for s, _ in order)
    labels = tuple(g.labels[s] + "|" + "".join("1" if b else "0" for b in bits) for s, bits in order)
    ng = Game(owners, succ, prob, 0, labels, labels)
    objs = []
    for i, o in enumerate(q.objectives):
        hit = frozenset(j for j, (_, bits) in enumerate(order) if bits[i])
        if o.kind == REACH:
            objs.append(Objective(REACH, hit))
        else:
            objs.append(Objective(SAFETY, frozenset(range(len(order))) - hit))
    return ng, QueryTemplate(q.connective, tuple(objs)), order


def binarize(g: Game) -> tuple:
    """Split fan-out above 2 into chains; returns (game, new->original map).

    States with a single successor are left as they are.
    """
    owners, succ, prob, labels = list(g.owners), [list(x) for x in g.succ], [list(x) for x in g.prob], list(g.labels)
    origin = list(g.states())
    for s in list(g.states()):
        ts, ps = g.succ[s], g.prob[s]
        if len(ts) <= 2:
            continue
        cur = s
        rest_mass = ONE
        for i in range(len(ts) - 2):
            nxt = len(owners)
            owners.append(g.owners[s])
            succ.append([])
            prob.append([])
            labels.append(f"{g.labels[s]}#{i + 1}")
            origin.append(s)
            succ[cur] = [ts[i], nxt]
            if g.owners[s] is RANDOM:
                p = ps[i] / rest_mass
                prob[cur] = [p, 1 - p]
                rest_mass -= ps[i]
            cur = nxt
        succ[cur] = [ts[-2], ts[-1]]
        if g.owners[s] is RANDOM:
            p = ps[-2] / rest_mass
            prob[cur] = [p, 1 - p]
    ng = Game(tuple(owners), tuple(map(tuple, succ)), tuple(map(tuple, prob)), g.initial,
              tuple(labels), tuple(labels))
    return ng, origin


def lift_template(q: QueryTemplate, origin: Sequence[int]) -> QueryTemplate:
    """Pull objective sets back along a new->original state map."""
    objs = []
    for o in q.objectives:
        objs.append(Objective(o.kind, frozenset(i for i, s in enumerate(origin) if s in o.states)))
    return QueryTemplate(q.connective, tuple(objs))


def restrict_horizon(g: Game, q: QueryTemplate, k: int) -> tuple:
    """Step-counting product: after k transitions every move enters an error sink.

    Sinks of g stay single absorbing states. The error sink is in no reach
    target and in every safe set. Returns (game, template, [(orig, step)]).
    """
    if k < 0:
        raise ModelError("horizon must be nonnegative")
    sinks = g.sinks()
    nodes: list = []
    index: dict = {}

    def node(s, j):
        key = (s, None) if s in sinks else (s, j)
        if key not in index:
            index[key] = len(nodes)
            nodes.append(key)
        return index[key]

    node(g.initial, 0)
    ERR = ("err", None)
    out: dict = {}
    i = 0
    while i < len(nodes):
        s, j = nodes[i]
        if nodes[i] == ERR:
            pass
        elif s in sinks:
            out[i] = ([i], list(g.prob[s]))
        elif j >= k:
            if ERR not in index:
                index[ERR] = len(nodes)
                nodes.append(ERR)
            out[i] = ([index[ERR]], [ONE] if g.owners[s] is RANDOM else [])
        else:
            out[i] = ([node(t, j + 1) for t in g.succ[s]], list(g.prob[s]))
        i += 1
    if ERR in index:
        e = index[ERR]
        out[e] = ([e], [ONE])
    owners = tuple(RANDOM if n == ERR else g.owners[n[0]] for n in nodes)
    labels = tuple("err" if n == ERR else (g.labels[n[0]] if n[1] is None else f"{g.labels[n[0]]}@{n[1]}") for n in nodes)
    ng = Game(owners, tuple(tuple(out[i][0]) for i in range(len(nodes))),
              tuple(tuple(out[i][1]) for i in range(len(nodes))), 0, labels, labels)
    objs = []
    for o in q.objectives:
        st = {i for i, n in enumerate(nodes) if n != ERR and n[0] in o.states}
        if o.kind == SAFETY and ERR in index:
            st.add(index[ERR])
        objs.append(Objective(o.kind, frozenset(st)))
    return ng, QueryTemplate(q.connective, tuple(objs)), nodes


def stopping(g: Game) -> bool:
    """True iff every strategy pair reaches a sink with probability 1 from every reachable state."""
    sinks = g.sinks()
    cand = set(g.reachable()) - sinks
    changed = True
    while changed:
        changed = False
        for s in list(cand):
            ts = g.succ[s]
            if g.owners[s] is RANDOM:
                keep = all(t in cand for t in ts)
            else:
                keep = any(t in cand for t in ts)
            if not keep:
                cand.discard(s)
                changed = True
    return not cand


def is_acyclic(g: Game) -> bool:
    """No cycle through non-sink states among states reachable from the initial one."""
    sinks = g.sinks()
    color: dict = {}
    for root in g.reachable():
        if root in color or root in sinks:
            continue
        stack = [(root, iter(g.succ[root]))]
        color[root] = 1
        while stack:
            s, it = stack[-1]
            for t in it:
                if t in sinks:
                    continue
                c = color.get(t)
                if c == 1:
                    return False
                if c is None:
                    color[t] = 1
                    stack.append((t, iter(g.succ[t])))
                    break
            else:
                color[s] = 2
                stack.pop()
    return True


def collapse_random_selfloops(g: Game) -> Game:
    """Renormalise Random self-loops with probability below 1 away.

    Reach and safety probabilities are unchanged: the loop only delays the exit.
    """
    succ, prob = list(g.succ), list(g.prob)
    for s in g.owned_by(RANDOM):
        if s in g.succ[s] and not g.is_sink(s):
            i = g.succ[s].index(s)
            stay = g.prob[s][i]
            ts = tuple(t for t in g.succ[s] if t != s)
            ps = tuple(p / (1 - stay) for t, p in zip(g.succ[s], g.prob[s]) if t != s)
            succ[s], prob[s] = ts, ps
    return replace(g, succ=tuple(succ), prob=tuple(prob))


def induced_game(g: Game, strat: dict) -> Game:
    """Fix the choices in `strat` (state -> successor) for owned states."""
    succ = list(g.succ)
    for s, t in strat.items():
        if t not in g.succ[s]:
            raise ModelError(f"choice {t} not available at {s}")
        succ[s] = (t,)
    return replace(g, succ=tuple(succ))


# JSON -------------------------------------------------------------------------

def game_to_json(g: Game) -> dict:
    states = [{"id": g.ids[s], "label": g.labels[s], "owner": g.owners[s].value} for s in g.states()]
    edges = []
    for s in g.states():
        for t, p in g.edges(s):
            e = {"from": g.ids[s], "to": g.ids[t]}
            if p is not None:
                e["prob"] = fmt_q(p)
            edges.append(e)
    return {"states": states, "initial": g.ids[g.initial], "edges": edges}


def game_from_json(data) -> Game:
    """Parse the JSON game format. Raises ModelError on malformed input."""
    try:
        states = data["states"]
        ids = [str(st["id"]) for st in states]
        if len(set(ids)) != len(ids):
            raise ModelError("duplicate state ids")
        pos = {sid: i for i, sid in enumerate(ids)}
        owners = []
        for st in states:
            try:
                owners.append(Owner(str(st["owner"]).lower()))
            except ValueError:
                raise ModelError(f"state {st['id']!r}: unknown owner {st['owner']!r}")
        labels = [str(st.get("label", st["id"])) for st in states]
        out: dict = {i: [] for i in range(len(ids))}
        for e in data["edges"]:
            a, b = str(e["from"]), str(e["to"])
            if a not in pos or b not in pos:
                raise ModelError(f"edge references unknown state: {a}->{b}")
            p = e.get("prob")
            out[pos[a]].append((pos[b], None if p is None else to_q(p)))
        init = str(data["initial"])
        if init not in pos:
            raise ModelError(f"unknown initial state {init}")
    except (KeyError, TypeError) as ex:
        raise ModelError(f"malformed game JSON: {ex}")
    succ, prob = [], []
    for i in range(len(ids)):
        if owners[i] is RANDOM:
            merged: dict = {}
            for t, p in out[i]:
                if p is None:
                    raise ModelError(f"random state {ids[i]}: edge without probability")
                merged[t] = merged.get(t, ZERO) + p
            succ.append(tuple(merged))
            prob.append(tuple(merged.values()))
        else:
            ts = []
            for t, _ in out[i]:
                if t not in ts:
                    ts.append(t)
            succ.append(tuple(ts))
            prob.append(())
    return Game(tuple(owners), tuple(succ), tuple(prob), pos[init], tuple(labels), tuple(ids))


def query_to_json(g: Game, q) -> dict:
    tq = q if isinstance(q, ThresholdQuery) else None
    t = tq.template if tq else q
    d = {"connective": t.connective,
         "objectives": [{"kind": o.kind, "set": [g.ids[s] for s in sorted(o.states)]} for o in t.objectives]}
    if tq:
        d["thresholds"] = [fmt_q(x) for x in tq.thresholds]
        d["strict"] = list(tq.strict)
    return d


def query_from_json(g: Game, data) -> tuple:
    """Returns (template, ThresholdQuery or None)."""
    try:
        objs = []
        for o in data["objectives"]:
            objs.append(Objective(o["kind"], frozenset(g.index_of(s) for s in o["set"])))
        t = QueryTemplate(data["connective"], tuple(objs))
        tq = None
        if data.get("thresholds") is not None:
            tq = ThresholdQuery(t, tuple(to_q(x) for x in data["thresholds"]),
                                tuple(data.get("strict") or ()))
    except (KeyError, TypeError) as ex:
        raise ModelError(f"malformed query JSON: {ex}")
    return t, tq


def load_game(path) -> Game:
    with open(path) as f:
        return game_from_json(json.load(f))


def load_query(g: Game, path) -> tuple:
    with open(path) as f:
        return query_from_json(g, json.load(f))
