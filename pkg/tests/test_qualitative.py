from itertools import product

import pytest
from hypothesis import given, strategies as st

from mosg.corpus import (BUILDERS, EXAMPLE_QBF, Qbf, build_named, cq_to_dq_reduction, det_strat_mem, flower, intro,
                         qbf_game, random_sink_game)
from mosg.model import (ADAM, EVE, RANDOM, GameBuilder, ModelError, Objective, ThresholdQuery,
                        collapse_random_selfloops, dq, induced_game, reach, safety)
from mosg.oracle import md_strategies, objective_probs
from mosg.qualitative import (almost_sure_region, alternating_safety_det, det_qual_bruteforce, reach_as_safety,
                              solve_qual_dq)
from mosg.model import cq
from mosg.rational import HALF, to_q

seeds = st.integers(0, 10_000)


def test_intro_regions():
    g, q = intro()
    t1 = q.objectives[0]
    reg = almost_sure_region(g, t1)
    assert {g.labels[s] for s in reg.states} == {"s1", "T1"}
    assert g.index_of("s2") not in reg
    assert solve_qual_dq(g, q) == (False, None)
    ok, idx = solve_qual_dq(g, q, state=g.index_of("s1"))
    assert ok and idx in (0, 1)


def test_safety_everything_is_safe():
    g, _ = intro()
    assert almost_sure_region(g, safety(set(g.states()))).states == frozenset(g.states())


def test_rejects_quantitative_thresholds():
    g, q = intro()
    with pytest.raises(ModelError):
        solve_qual_dq(g, ThresholdQuery(q, (to_q("1/2"), 1)))


def _brute_almost_sure(g, obj):
    q = cq(obj)
    out = set()
    for s in g.states():
        for sig in md_strategies(g, EVE):
            if all(objective_probs(g, q, {**sig, **tau}, s)[0] == 1 for tau in md_strategies(g, ADAM)):
                out.add(s)
                break
    return out


@given(seeds, st.integers(1, 5), st.booleans())
def test_almost_sure_matches_brute_force(seed, m, use_safety):
    g, q = random_sink_game(m, seed, acyclic=True)
    o = q.objectives[0]
    if use_safety:
        o = safety(set(g.states()) - o.states)
    assert almost_sure_region(g, o).states == frozenset(_brute_almost_sure(g, o))


def _stack_counterexample():
    b = GameBuilder()
    r = b.state("r", RANDOM)
    left = b.state("L", ADAM)
    right = b.state("R", EVE)
    a, bb, c, d = (b.sink(x) for x in "abcd")
    b.edge(r, left, HALF)
    b.edge(r, right, HALF)
    b.edge(left, a)
    b.edge(left, bb)
    b.edge(right, c)
    b.edge(right, d)
    g = b.build(r)
    allst = set(g.states())
    return g, dq(safety(allst - {a, c}), safety(allst - {bb, d}))


def test_stack_search_is_unsound_on_counterexample():
    g, q = _stack_counterexample()
    assert det_qual_bruteforce(g, q) is False
    assert alternating_safety_det(g, q) is False
    assert alternating_safety_det(g, q, method="stack") is True


def test_det_strat_mem_safety_variant():
    g, q = det_strat_mem()
    s = reach_as_safety(g, q)
    assert alternating_safety_det(g, s)
    assert alternating_safety_det(g, s, method="stack")
    assert det_qual_bruteforce(g, s)


def test_adam_alone_reaches_everything():
    b = GameBuilder()
    s0 = b.state("s0", ADAM)
    r = b.state("r", RANDOM)
    u1, u2 = b.sink("u1"), b.sink("u2")
    b.edge(s0, r)
    b.edge(s0, u1)
    b.edge(r, u1, HALF)
    b.edge(r, u2, HALF)
    g = b.build(s0)
    allst = set(g.states())
    q = dq(safety(allst - {u1}), safety(allst - {u2}))
    assert not alternating_safety_det(g, q)
    assert not det_qual_bruteforce(g, q)


@pytest.mark.parametrize("name", [n for n in sorted(BUILDERS) if build_named(n)[0].n_states <= 8])
def test_tree_search_matches_brute_force_on_corpus(name):
    g, q = build_named(name)
    t = q.template if isinstance(q, ThresholdQuery) else q
    s = reach_as_safety(g, dq(*t.objectives))
    assert alternating_safety_det(g, s) == det_qual_bruteforce(g, s)


@given(seeds, st.integers(1, 5))
def test_tree_search_matches_brute_force_random(seed, m):
    g, q = random_sink_game(m, seed, acyclic=True)
    s = reach_as_safety(g, dq(*q.objectives))
    assert alternating_safety_det(g, s) == det_qual_bruteforce(g, s)


# QBF ------------------------------------------------------------------------------

def test_example_qbf_true_and_achievable():
    assert EXAMPLE_QBF.evaluate()
    g, q = qbf_game(EXAMPLE_QBF)
    assert g.n_states == 15
    assert det_qual_bruteforce(collapse_random_selfloops(g), q)


@pytest.mark.parametrize("prefix,matrix", [
    ("A x1", "x1"),
    ("E x1 A x2", "x1 & x2 | ~x1 & ~x2"),
    ("A x1 E x2", "x1 & x2 | ~x1 & ~x2"),
    ("E x1 E x2", "x1 & ~x1"),
    ("A x1 A x2 E x3", "x1 & x3 | x2 & ~x3 | ~x1 & ~x2"),
])
def test_qbf_game_matches_truth(prefix, matrix):
    f = Qbf.parse(prefix, matrix)
    g, q = qbf_game(f)
    assert det_qual_bruteforce(collapse_random_selfloops(g), q) == f.evaluate()


# flower: memory needed by the qualitative reduction --------------------------------

def _automaton_wins(g, q, M, upd_states, delta, act):
    """Eve plays the deterministic automaton; the remaining game is Adam's alone."""
    full = (1 << q.n) - 1

    def bits_of(s, bits):
        for i, o in enumerate(q.objectives):
            if s in o.states:
                bits |= 1 << i
        return bits

    start = (g.initial, 0, bits_of(g.initial, 0))
    seen, stack, edges = {start}, [start], {}
    while stack:
        node = stack.pop()
        s, m, bits = node
        if g.is_sink(s):
            if bits != full:
                return False
            edges[node] = []
            continue
        if g.owners[s] is EVE:
            ts = [act[(m, s)]]
        else:
            ts = list(g.succ[s])
        nxt = []
        for t in ts:
            m2 = delta[(m, t)] if t in upd_states else m
            n2 = (t, m2, bits_of(t, bits))
            nxt.append(n2)
            if n2 not in seen:
                seen.add(n2)
                stack.append(n2)
        edges[node] = nxt
    # a reachable cycle keeps its bits; it loses unless all objectives were met
    color = {}

    def cyclic(u):
        color[u] = 1
        for v in edges[u]:
            if color.get(v) == 1 and v[2] != full:
                return True
            if v not in color and cyclic(v):
                return True
        color[u] = 2
        return False
    return not cyclic(start)


def _memory_suffices(M, n=2):
    g, q = flower(n)
    targets = [g.index_of(f"t{i}") for i in range(1, n + 1)]
    petals = [g.index_of(f"e{i}") for i in range(1, n + 1)]
    dkeys = [(m, t) for m in range(M) for t in targets]
    akeys = [(m, e) for m in range(M) for e in petals]
    for dv in product(range(M), repeat=len(dkeys)):
        delta = dict(zip(dkeys, dv))
        for av in product(*[g.succ[e] for _, e in akeys]):
            if _automaton_wins(g, q, M, set(targets), delta, dict(zip(akeys, av))):
                return True
    return False


def test_flower_needs_three_memory_states():
    assert not _memory_suffices(1)
    assert not _memory_suffices(2)
    assert _memory_suffices(3)


def test_cq_to_dq_reduction_shape():
    g, q = flower(2)
    tq = ThresholdQuery(q, (1, 1))
    ng, ntq = cq_to_dq_reduction(g, tq)
    assert ng.n_states == g.n_states + 2 + 2
    assert ntq.thresholds == (1, 1)
    assert ntq.template.connective == "or"
