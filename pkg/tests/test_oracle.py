import pytest
from hypothesis import given, strategies as st

from mosg import polytope as P
from mosg.corpus import inf_mem, intro, random_sink_game
from mosg.model import ADAM, EVE, ThresholdQuery, dq, induced_game
from mosg.oracle import (GuardExceeded, chain_reach, dq_standard_oracle, enumerate_kstep, forall_exists_oracle,
                         horizon_probs, kstep_count, md_forall_exists, md_pareto, md_strategies, standard_cq_oracle,
                         ultimately_periodic_prob)
from mosg.polytope import grid_points
from mosg.rational import to_q
from mosg.vi import Fixpoint, Horizon, dq_achievable_point, run_cq_vi, run_forall_exists_vi

Q = to_q
seeds = st.integers(0, 10_000)


def test_intro_adam_strategies():
    g, _ = intro()
    assert len(list(enumerate_kstep(g, ADAM, 2))) == 2
    assert kstep_count(g, ADAM, 2) == 2


@given(seeds, st.integers(1, 5), st.integers(1, 4))
def test_reduced_enumeration_is_smaller(seed, m, k):
    g, _ = random_sink_game(m, seed)
    assert kstep_count(g, EVE, k, reduced=True) <= kstep_count(g, EVE, k)
    assert len(list(enumerate_kstep(g, EVE, k, reduced=True))) == kstep_count(g, EVE, k, reduced=True)


def test_guard():
    g, _ = intro()
    with pytest.raises(GuardExceeded):
        list(enumerate_kstep(g, ADAM, 2, guard=1))


def test_chain_reach():
    g, _ = inf_mem()
    s, a = g.index_of("s"), g.index_of("t1")
    t1 = g.index_of("T1")
    # always pick t1: reach T1 with probability 1
    assert chain_reach(g, {s: a}, {t1})[s] == 1


def test_ultimately_periodic():
    assert ultimately_periodic_prob("11", "01") == Q("5/6")
    assert ultimately_periodic_prob("", "1") == 1
    assert ultimately_periodic_prob("0", "0") == 0
    with pytest.raises(ValueError):
        ultimately_periodic_prob("1", "")


def _bits_strategy(g, u, v):
    s, a, c = g.index_of("s"), g.index_of("t1"), g.index_of("t2")

    def strat(h):
        j = sum(1 for x in h if x == s) - 1   # round index
        w = u[j] if j < len(u) else v[(j - len(u)) % len(v)]
        return a if w == "1" else c
    return strat


@pytest.mark.parametrize("u,v", [("11", "01"), ("", "1"), ("0", "10"), ("101", "0")])
def test_inf_mem_tail_bound(u, v):
    g, q = inf_mem()
    limit = ultimately_periodic_prob(u, v)
    for j in range(1, 5):
        rounds = (len(u) + len(v)) * j
        p = horizon_probs(g, q, _bits_strategy(g, u, v), 2 * rounds)[0]
        assert 0 <= limit - p <= Q(1) / 2 ** rounds


@given(seeds, st.integers(1, 5), st.integers(0, 4))
def test_standard_oracle_matches_f(seed, m, k):
    g, q = random_sink_game(m, seed)
    assert standard_cq_oracle(g, q, k) == run_cq_vi(g, q, Horizon(k)).initial_value


@given(seeds, st.integers(1, 5))
def test_md_tools_on_acyclic(seed, m):
    g, q = random_sink_game(m, seed, acyclic=True)
    for adam in md_strategies(g, ADAM):
        assert md_pareto(g, q, adam) == run_cq_vi(induced_game(g, adam), q, Fixpoint()).initial_value
    assert md_forall_exists(g, q) == run_forall_exists_vi(g, q, Fixpoint()).initial_value


def test_dq_oracle_intro():
    g, q = intro()
    s2 = g.index_of("s2")
    assert dq_standard_oracle(g.with_initial(s2), ThresholdQuery(q, (Q("1/2"), Q("1/2"))))
    assert not dq_standard_oracle(g.with_initial(s2), ThresholdQuery(q, (Q("0.6"), Q("0.6"))))


@given(seeds, st.integers(1, 5))
def test_dq_oracle_agrees_with_dualisation(seed, m):
    g, q = random_sink_game(m, seed, acyclic=True)
    d = dq(*q.objectives)
    for x in grid_points(2, 4):
        tq = ThresholdQuery(d, x)
        assert dq_standard_oracle(g, tq) == dq_achievable_point(g, tq).achievable
