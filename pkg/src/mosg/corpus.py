"""Named game constructions, the random generator and the experiment runner.

Random games use xoshiro256** (Blackman and Vigna, 2018) seeded through
splitmix64, so a seed denotes the same game in any implementation of that
generator. Version tag of the generator scheme: "xoshiro256ss-v1".
"""
from __future__ import annotations

import csv
import time
from dataclasses import dataclass, field
from itertools import combinations
from typing import Optional, Sequence

from gmpy2 import mpq

from .model import (ADAM, AND, EVE, OR, RANDOM, Game, GameBuilder, ModelError, Objective, QueryTemplate,
                    ThresholdQuery, cq, dq, reach, safety, validate)
from .rational import HALF, ONE, to_q

PRNG_VERSION = "xoshiro256ss-v1"
_MASK = (1 << 64) - 1


class Xoshiro256:
    """xoshiro256** 1.0 with splitmix64 seeding."""

    def __init__(self, seed: int):
        x = seed & _MASK
        s = []
        for _ in range(4):
            x = (x + 0x9E3779B97F4A7C15) & _MASK
            z = x
            z = ((z ^ (z >> 30)) * 0xBF58476D1CE4E5B9) & _MASK
            z = ((z ^ (z >> 27)) * 0x94D049BB133111EB) & _MASK
            s.append(z ^ (z >> 31))
        self.s = s

    @staticmethod
    def _rotl(x, k):
        return ((x << k) | (x >> (64 - k))) & _MASK

    def next(self) -> int:
        s = self.s
        result = (self._rotl((s[1] * 5) & _MASK, 7) * 9) & _MASK
        t = (s[1] << 17) & _MASK
        s[2] ^= s[0]
        s[3] ^= s[1]
        s[1] ^= s[2]
        s[0] ^= s[3]
        s[2] ^= t
        s[3] = self._rotl(s[3], 45)
        return result

    def below(self, n: int) -> int:
        """Uniform integer in [0, n) by rejection."""
        if n <= 0:
            raise ValueError("n must be positive")
        limit = (1 << 64) - ((1 << 64) % n)
        while True:
            r = self.next()
            if r < limit:
                return r % n

    def sample(self, pool: Sequence, k: int) -> list:
        pool = list(pool)
        out = []
        for _ in range(k):
            out.append(pool.pop(self.below(len(pool))))
        return out


# small example games ---------------------------------------------------------------

def intro():
    b = GameBuilder()
    s0 = b.state("s0", RANDOM)
    s1 = b.state("s1", EVE)
    s2 = b.state("s2", ADAM)
    t1 = b.sink("T1")
    t2 = b.sink("T2")
    b.edge(s0, s1, HALF)
    b.edge(s0, s2, HALF)
    for s in (s1, s2):
        b.edge(s, t1)
        b.edge(s, t2)
    return b.build(s0), dq(reach({t1}), reach({t2}))


def det_strat_mem():
    """Adam moves first; Eve's best reply at s1 depends on his choice."""
    b = GameBuilder()
    s0 = b.state("s0", ADAM)
    pa = b.state("pa", RANDOM)
    pb = b.state("pb", RANDOM)
    s1 = b.state("s1", EVE)
    t1 = b.sink("T1")
    t2 = b.sink("T2")
    b.edge(s0, pa)
    b.edge(s0, pb)
    b.edge(pa, t1, HALF)
    b.edge(pa, s1, HALF)
    b.edge(pb, t2, HALF)
    b.edge(pb, s1, HALF)
    b.edge(s1, t1)
    b.edge(s1, t2)
    return b.build(s0), dq(reach({t1}), reach({t2}))


def inf_mem():
    """MDP where the bits of the strategy's choice sequence spell P(◇T1)."""
    b = GameBuilder()
    s = b.state("s", EVE)
    a = b.state("t1", RANDOM)
    c = b.state("t2", RANDOM)
    t1 = b.sink("T1")
    t2 = b.sink("T2")
    b.edge(s, a)
    b.edge(s, c)
    b.edge(a, t1, HALF)
    b.edge(a, s, HALF)
    b.edge(c, t2, HALF)
    b.edge(c, s, HALF)
    return b.build(s), cq(reach({t1}), reach({t2}))


def no_analog_left():
    """Two components sharing the sinks; start at s0, compare with t0 via with_initial."""
    b = GameBuilder()
    s0 = b.state("s0", RANDOM)
    s1 = b.state("s1", EVE)
    s2 = b.state("s2", ADAM)
    t0 = b.state("t0", RANDOM)
    t1 = b.sink("t1", EVE)
    t2 = b.state("t2", ADAM)
    T1 = b.sink("T1")
    T2 = b.sink("T2")
    b.edge(s0, s1, HALF)
    b.edge(s0, s2, HALF)
    b.edge(t0, t1, HALF)
    b.edge(t0, t2, HALF)
    for s in (s1, s2, t2):
        b.edge(s, T1)
        b.edge(s, T2)
    g = b.build(s0)
    every = set(g.states())
    return g, dq(safety(every - {T1}), safety(every - {T2}))


def no_analog_right():
    b = GameBuilder()
    s0 = b.state("s0", RANDOM)
    s1 = b.state("s1", EVE)
    s2 = b.state("s2", ADAM)
    t1 = b.sink("T1")
    t2 = b.sink("T2")
    t12 = b.sink("T12")
    b.edge(s0, s1, HALF)
    b.edge(s0, s2, HALF)
    b.edge(s1, t1)
    b.edge(s1, t2)
    for t in (t1, t2, t12):
        b.edge(s2, t)
    return b.build(s0), cq(reach({t1, t12}), reach({t2, t12}))


def flower(n: int = 4):
    """Adam's hub, n Eve petals; petal i visits T_i and returns, or stops in a sink in every other T_j."""
    if n < 1:
        raise ModelError("flower needs n >= 1")
    b = GameBuilder()
    hub = b.state("hub", ADAM)
    petals, tgt, stop = [], [], []
    for i in range(1, n + 1):
        petals.append(b.state(f"e{i}", EVE))
    for i in range(1, n + 1):
        tgt.append(b.state(f"t{i}", RANDOM))
    for i in range(1, n + 1):
        stop.append(b.sink(f"nt{i}"))
    for i in range(n):
        b.edge(hub, petals[i])
        b.edge(petals[i], tgt[i])
        b.edge(petals[i], stop[i])
        b.edge(tgt[i], hub, 1)
    objs = [reach({tgt[i]} | {stop[j] for j in range(n) if j != i}) for i in range(n)]
    return b.build(hub), cq(*objs)


def _subsets(n, proper=True):
    out = []
    for r in range(0, n + (0 if proper else 1)):
        out.extend(combinations(range(n), r))
    return out


def penalty_probability(size: int, n: int) -> mpq:
    """Penalty for Eve picking `size` targets: strictly increasing, below 1."""
    return mpq(size, 2 * n)


def penalty(n: int = 2):
    """Three stages around a monotone penalty coin; objectives are safety from every T_i."""
    if n < 1:
        raise ModelError("penalty needs n >= 1")
    b = GameBuilder()
    start = b.state("start", RANDOM)
    proper = _subsets(n)
    visit = {X: b.state("v" + _name(X), RANDOM) for X in proper}
    eve = b.state("B", EVE)
    coin = {Y: b.state("c" + _name(Y), RANDOM) for Y in proper}
    adam = {Y: b.state("C" + _name(Y), ADAM) for Y in proper}
    every = b.sink("all")
    final = {Z: b.sink("w" + _name(Z)) for Z in proper}
    w = mpq(1, len(proper))
    for X in proper:
        b.edge(start, visit[X], w)
        b.edge(visit[X], eve, 1)
    for Y in proper:
        b.edge(eve, coin[Y])
        p = penalty_probability(len(Y), n)
        if p > 0:
            b.edge(coin[Y], every, p)
        b.edge(coin[Y], adam[Y], 1 - p)
        for Z in proper:
            if len(Z) <= n - len(Y) - 1:
                b.edge(adam[Y], final[Z])
    g = b.build(start)
    allst = set(g.states())
    objs = []
    for i in range(n):
        hit = {visit[X] for X in proper if i in X} | {final[Z] for Z in proper if i in Z} | {every}
        objs.append(safety(allst - hit))
    return g, dq(*objs)


def _name(X):
    return "{" + ",".join(str(i + 1) for i in X) + "}"


def three_stage(n: int = 2, variant: str = "reach"):
    """Adam picks n/2 targets, Eve n/2, Adam n/2+1; each stage ends the game with probability 1/2."""
    if n < 2 or n % 2:
        raise ModelError("three-stage needs an even n >= 2")
    q = n // 2
    b = GameBuilder()
    A = b.state("A", ADAM)
    half = list(combinations(range(n), q))
    big = list(combinations(range(n), q + 1))
    a = {X: b.state("a" + _name(X), RANDOM) for X in half}
    B = b.state("B", EVE)
    bb = {Y: b.state("b" + _name(Y), RANDOM) for Y in half}
    C = b.state("C", ADAM)
    sinks = {}
    for X in half + big:
        if X not in sinks:
            sinks[X] = b.sink("u" + _name(X))
    for X in half:
        b.edge(A, a[X])
        b.edge(a[X], sinks[X], HALF)
        b.edge(a[X], B, HALF)
        b.edge(B, bb[X])
        b.edge(bb[X], sinks[X], HALF)
        b.edge(bb[X], C, HALF)
    for Z in big:
        b.edge(C, sinks[Z])
    g = b.build(A)
    targets = [{sinks[X] for X in sinks if i in X} for i in range(n)]
    if variant == "reach":
        return g, dq(*[reach(T) for T in targets])
    if variant == "safety":
        nonsink = set(g.states()) - g.sinks()
        return g, dq(*[safety(T | nonsink) for T in targets])
    raise ModelError(f"unknown variant {variant!r}")


def floor_heating():
    """Adapted floor heating model; the two drawn error nodes are one sink here.

    Unlabelled probabilistic branches are 1/2 each.
    """
    b = GameBuilder()
    cc = b.state("CC", EVE)
    hc0 = b.state("HC0", ADAM)
    ch0 = b.state("CH0", ADAM)
    hc1 = b.state("HC1", EVE)
    ch1 = b.state("CH1", EVE)
    phc0 = b.state("pHC0", RANDOM)
    pch0 = b.state("pCH0", RANDOM)
    phc1 = b.state("pHC1", RANDOM)
    pch1 = b.state("pCH1", RANDOM)
    hh = b.sink("HH")
    err = b.sink("err")
    for x, y in [(cc, hc0), (cc, ch0), (hc0, phc0), (hc0, hc1), (ch0, pch0), (ch0, ch1),
                 (hc1, phc1), (hc1, err), (ch1, err), (ch1, pch1)]:
        b.edge(x, y)
    for x, y, z in [(phc0, hc1, hh), (pch0, ch1, err), (phc1, hc0, hh), (pch1, hh, ch0)]:
        b.edge(x, y, HALF)
        b.edge(x, z, HALF)
    g = b.build(cc)
    return g, cq(reach({hh}), safety(set(g.states()) - {err}))


# QBF -----------------------------------------------------------------------------

@dataclass(frozen=True)
class Qbf:
    prefix: tuple   # ((quantifier "E"|"A", variable), ...)
    matrix: tuple   # DNF: tuple of terms, each a tuple of (variable, positive)

    def __post_init__(self):
        names = [v for _, v in self.prefix]
        if len(set(names)) != len(names):
            raise ModelError("variable quantified twice")
        for qt, _ in self.prefix:
            if qt not in ("E", "A"):
                raise ModelError(f"unknown quantifier {qt!r}")
        for term in self.matrix:
            if not term:
                raise ModelError("empty term")
            for v, _ in term:
                if v not in names:
                    raise ModelError(f"free variable {v}")

    @classmethod
    def parse(cls, prefix: str, matrix: str) -> "Qbf":
        """prefix like "E x1 A x2", matrix like "~x1 & x2 | ~x2 & x3"."""
        toks = prefix.split()
        pre = tuple((toks[i], toks[i + 1]) for i in range(0, len(toks), 2))
        terms = []
        for t in matrix.split("|"):
            lits = []
            for lit in t.split("&"):
                lit = lit.strip()
                lits.append((lit.lstrip("~"), not lit.startswith("~")))
            terms.append(tuple(lits))
        return cls(pre, tuple(terms))

    def evaluate(self) -> bool:
        def ev(i, env):
            if i == len(self.prefix):
                return any(all(env[v] == pos for v, pos in t) for t in self.matrix)
            qt, v = self.prefix[i]
            vals = (ev(i + 1, {**env, v: b}) for b in (False, True))
            return any(vals) if qt == "E" else all(vals)

        return ev(0, {})


EXAMPLE_QBF = Qbf.parse("E x1 A x2 E x3", "~x1 & x2 & ~x3 | ~x2 & x3")


def qbf_game(f: Qbf):
    """Variable gadgets reveal a literal with probability 1/2 or move on."""
    b = GameBuilder()
    m = len(f.prefix)
    sel, lit = [], {}
    for i, (qt, v) in enumerate(f.prefix):
        sel.append(b.state(f"s{i + 1}", EVE if qt == "E" else ADAM))
        for pos in (True, False):
            lit[(i, pos)] = b.state(("" if pos else "~") + v, RANDOM)
    marks = {}
    for i, (qt, v) in enumerate(f.prefix):
        for pos in (True, False):
            sat = tuple(j for j, term in enumerate(f.matrix)
                        if all(tv != v or tp == pos for tv, tp in term))
            name = f"T[{('' if pos else '~') + v}]"
            marks[(i, pos)] = (b.sink(name), sat)
    for i in range(m):
        for pos in (True, False):
            x = lit[(i, pos)]
            b.edge(sel[i], x)
            b.edge(x, marks[(i, pos)][0], HALF)
            b.edge(x, sel[i + 1] if i + 1 < m else x, HALF)
    g = b.build(sel[0])
    objs = [reach({s for s, sat in marks.values() if j in sat}) for j in range(len(f.matrix))]
    return g, dq(*objs)


# reductions ------------------------------------------------------------------------

def cq_to_dq_reduction(g: Game, tq: ThresholdQuery, variant: str = "qualitative"):
    """Half the time play g, half the time Adam names a target to be visited alone."""
    t = tq.template
    if t.connective != AND or any(o.kind != "reach" for o in t.objectives):
        raise ModelError("reduction expects a conjunction of reachability objectives")
    n = t.n
    N = g.n_states
    owners = list(g.owners) + [RANDOM, ADAM] + [RANDOM] * n
    root, pick = N, N + 1
    succ = list(g.succ) + [(g.initial, pick), tuple(range(N + 2, N + 2 + n))] + [(N + 2 + i,) for i in range(n)]
    prob = list(g.prob) + [(HALF, HALF), ()] + [(ONE,)] * n
    labels = list(g.labels) + ["root", "pick"] + [f"tau{i + 1}" for i in range(n)]
    ng = Game(tuple(owners), tuple(succ), tuple(prob), root, tuple(labels), tuple(labels))
    objs = tuple(Objective("reach", o.states | {N + 2 + i}) for i, o in enumerate(t.objectives))
    if variant == "qualitative":
        th = (ONE,) * n
    elif variant == "quantitative-general":
        th = (HALF + mpq(1, 2 * n),) * n
    elif variant == "quantitative-deterministic":
        th = tuple(HALF * x + HALF for x in tq.thresholds)
    else:
        raise ModelError(f"unknown variant {variant!r}")
    return ng, ThresholdQuery(QueryTemplate(OR, objs), th)


# random games ------------------------------------------------------------------------

def random_game(m: int = 10, l: int = 1, seed: int = 0):
    """m states, owners uniform, two distinct successors each, l reach sinks and l unsafe sinks."""
    if m < 3 or not (1 <= l) or 2 * l >= m:
        raise ModelError("need m >= 3 and 1 <= l with 2l < m")
    rng = Xoshiro256(seed)
    owners = [(EVE, ADAM, RANDOM)[rng.below(3)] for _ in range(m)]
    succ, prob = [], []
    for s in range(m):
        ts = tuple(rng.sample([t for t in range(m) if t != s], 2))
        succ.append(ts)
        prob.append((HALF, HALF) if owners[s] is RANDOM else ())
    chosen = rng.sample(range(m), 2 * l)
    target, unsafe = chosen[:l], chosen[l:]
    for s in chosen:
        succ[s] = (s,)
        prob[s] = (ONE,) if owners[s] is RANDOM else ()
    labels = tuple(f"s{i}" for i in range(m))
    g = Game(tuple(owners), tuple(succ), tuple(prob), 0, labels, labels)
    return g, cq(reach(set(target)), safety(set(range(m)) - set(unsafe)))


def random_sink_game(m: int = 5, seed: int = 0, acyclic: bool = False):
    """m inner states with uniform owners and two successors, plus sinks T1, T2, T12.

    The query is the CQ reach{T1,T12} ∧ reach{T2,T12}. With `acyclic` every
    edge goes to a later inner state or a sink.
    """
    if m < 1:
        raise ModelError("need at least one inner state")
    rng = Xoshiro256(seed)
    b = GameBuilder()
    owners = [(EVE, ADAM, RANDOM)[rng.below(3)] for _ in range(m)]
    for i, o in enumerate(owners):
        b.state(f"s{i}", o)
    t1, t2, t12 = b.sink("T1"), b.sink("T2"), b.sink("T12")
    for i, o in enumerate(owners):
        pool = [j for j in range(i + 1 if acyclic else 0, m) if j != i] + [t1, t2, t12]
        a, c = rng.sample(pool, 2)
        if o is RANDOM:
            b.edge(i, a, HALF)
            b.edge(i, c, HALF)
        else:
            b.edge(i, a)
            b.edge(i, c)
    return b.build(0), cq(reach({t1, t12}), reach({t2, t12}))


# registry ------------------------------------------------------------------------------

BUILDERS = {
    "intro": intro,
    "det-strat-mem": det_strat_mem,
    "inf-mem": inf_mem,
    "no-analog-left": no_analog_left,
    "no-analog-right": no_analog_right,
    "flower": flower,
    "penalty": penalty,
    "three-stage": three_stage,
    "floor-heating": floor_heating,
    "qbf-example": lambda: qbf_game(EXAMPLE_QBF),
}


def build_named(name: str, **params):
    if name not in BUILDERS:
        raise ModelError(f"unknown construction {name!r}; known: {', '.join(sorted(BUILDERS))}")
    g, q = BUILDERS[name](**params)
    diags = validate(g)
    if diags:
        raise AssertionError(f"builder {name} produced an invalid game: {diags}")
    return g, q


# experiments ---------------------------------------------------------------------------

@dataclass
class ExperimentConfig:
    instances: int = 100
    m: int = 10
    l: int = 1
    seed: int = 0
    horizons: tuple = (1, 2, 3, 4, 5, 6, 7, 8, 9, 10)
    timeout: float = 10.0
    prune: bool = True
    compare_unpruned: bool = True
    max_candidates: int = 100_000
    family_cap: int = 10_000

    def __post_init__(self):
        if self.m < 3 or self.l < 1 or not self.horizons:
            raise ValueError("invalid experiment configuration")


@dataclass
class ExperimentRow:
    k: int
    mean_pruned: Optional[float]
    mean_unpruned: Optional[float]
    timeouts_pruned: int
    timeouts_unpruned: int
    completed: int
    wall_ms: float


@dataclass
class InstanceRun:
    instance_id: int
    seed: int
    counts_pruned: list       # counts[k][s], up to the last completed iteration
    counts_unpruned: Optional[list]
    status_pruned: str
    status_unpruned: Optional[str]
    wall_ms_pruned: float
    wall_ms_unpruned: float


def _run(g, q, kmax, prune, cfg):
    from .vi import Horizon, run_forall_exists_vi
    t0 = time.perf_counter()
    r = run_forall_exists_vi(g, q, Horizon(kmax), prune=prune, family_cap=cfg.family_cap, timeout=cfg.timeout)
    return r, (time.perf_counter() - t0) * 1000


def run_experiment(cfg: ExperimentConfig, csv_path=None, progress=None):
    """Screen seeds for hard instances, then compare pruned and unpruned runs.

    Returns (rows, instance runs, number of screened candidates).
    """
    kmax = max(cfg.horizons)
    runs: list = []
    screened = 0
    seed = cfg.seed
    while len(runs) < cfg.instances and screened < cfg.max_candidates:
        g, q = random_game(cfg.m, cfg.l, seed)
        screened += 1
        rp, wp = _run(g, q, kmax, True, cfg)
        hard = any(c > 1 for row in rp.stats.counts for c in row)
        if hard:
            ru, wu = _run(g, q, kmax, False, cfg) if cfg.compare_unpruned else (None, 0.0)
            runs.append(InstanceRun(len(runs), seed, rp.stats.counts, ru.stats.counts if ru else None,
                                    rp.status, ru.status if ru else None, wp, wu))
            if progress:
                progress(runs[-1])
        seed += 1
    rows = aggregate(runs, cfg.horizons)
    if csv_path is not None:
        write_csv(runs, cfg.horizons, csv_path)
    return rows, runs, screened


def _count_at(counts, k):
    return counts[k] if counts is not None and k < len(counts) else None


def aggregate(runs, horizons):
    rows = []
    for k in horizons:
        mp, mu, tp, tu, done = [], [], 0, 0, 0
        for r in runs:
            cp = _count_at(r.counts_pruned, k)
            cu = _count_at(r.counts_unpruned, k)
            tp += cp is None
            tu += cu is None and r.counts_unpruned is not None
            if cp is not None and cu is not None:
                done += 1
                mp.append(sum(cp) / len(cp))
                mu.append(sum(cu) / len(cu))
        rows.append(ExperimentRow(k, sum(mp) / len(mp) if mp else None, sum(mu) / len(mu) if mu else None,
                                  tp, tu, done, sum(r.wall_ms_pruned + r.wall_ms_unpruned for r in runs)))
    return rows


CSV_COLUMNS = ["instance_id", "seed", "k", "state", "count_pruned", "count_unpruned",
               "timeout_pruned", "timeout_unpruned", "wall_ms"]


def write_csv(runs, horizons, path):
    with open(path, "w", newline="") as f:
        w = csv.writer(f)
        w.writerow(CSV_COLUMNS)
        for r in runs:
            n = len(r.counts_pruned[0])
            for k in horizons:
                cp = _count_at(r.counts_pruned, k)
                cu = _count_at(r.counts_unpruned, k)
                for s in range(n):
                    w.writerow([r.instance_id, r.seed, k, s,
                                "" if cp is None else cp[s], "" if cu is None else cu[s],
                                int(cp is None), int(cu is None),
                                f"{r.wall_ms_pruned + r.wall_ms_unpruned:.1f}"])
