import csv
from itertools import combinations, product

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from mosg.corpus import (BUILDERS, PRNG_VERSION, ExperimentConfig, Qbf, Xoshiro256, build_named,
                         cq_to_dq_reduction, floor_heating, penalty_probability, qbf_game, random_game,
                         random_sink_game, run_experiment, three_stage)
from mosg.model import (ADAM, AND, EVE, OR, RANDOM, ModelError, ThresholdQuery, classify, cq, game_from_json,
                        game_to_json, reach, validate, validate_query)
from mosg.oracle import chain_reach
from mosg.rational import to_q

Q = to_q


def test_xoshiro_reference_vector():
    r = Xoshiro256(0)
    r.s = [1, 2, 3, 4]
    assert [r.next() for _ in range(4)] == [11520, 0, 1509978240, 1215971899390074240]


def test_splitmix_seeding():
    assert Xoshiro256(0).s[0] == 0xE220A8397B1DCDAF
    assert PRNG_VERSION.startswith("xoshiro256")


@given(st.integers(0, 2**64 - 1), st.integers(1, 50))
def test_below_in_range(seed, n):
    r = Xoshiro256(seed)
    assert all(0 <= r.below(n) < n for _ in range(20))


@pytest.mark.parametrize("name", sorted(BUILDERS))
def test_builders_validate(name):
    g, q = build_named(name)
    assert validate(g) == []
    assert validate_query(g, q) == []
    classify(g, q)  # must not raise


def test_unknown_builder():
    with pytest.raises(ModelError):
        build_named("nope")


def test_intro_shape():
    g, q = build_named("intro")
    assert g.n_states == 5
    assert q.n == 2 and all(o.kind == "reach" for o in q.objectives)
    r = g.index_of("s0")
    assert g.owners[r] is RANDOM and g.prob[r] == (Q("1/2"), Q("1/2"))


def test_flower_shape():
    g, q = build_named("flower", n=4)
    owners = [g.owners[s] for s in g.states()]
    assert owners.count(ADAM) == 1
    assert owners.count(EVE) == 4 + len([s for s in g.sinks() if g.owners[s] is EVE])
    assert sum(1 for s in g.states() if g.labels[s].startswith("t")) == 4
    assert sum(1 for s in g.states() if g.labels[s].startswith("nt")) == 4
    assert q.n == 4


def test_floor_heating_shape():
    g, q = floor_heating()
    assert g.n_states == 11
    assert q.connective == AND
    assert [o.kind for o in q.objectives] == ["reach", "safety"]
    for s in g.states():
        if g.owners[s] is RANDOM and s not in g.sinks():
            assert all(p == Q("1/2") for p in g.prob[s])


def test_penalty_strictly_increasing():
    for n in range(1, 7):
        ps = [penalty_probability(k, n) for k in range(n)]
        assert ps[0] == 0
        assert all(a < b for a, b in zip(ps, ps[1:]))
        assert all(p < 1 for p in ps)


def test_three_stage_params():
    with pytest.raises(ModelError):
        three_stage(3)
    with pytest.raises(ModelError):
        three_stage(2, variant="other")


def test_three_stage_chain_evaluation():
    # a target is visited surely iff it is picked in every stage
    g, q = three_stage(2)
    n = 2
    A, B, C = (g.index_of(x) for x in "ABC")
    half = list(combinations(range(n), 1))
    big = list(combinations(range(n), 2))

    def pick(state, X, pre):
        name = pre + "{" + ",".join(str(i + 1) for i in X) + "}"
        return g.index_of(name)

    for X, Y, Z in product(half, half, big):
        choice = {A: pick(A, X, "a"), B: pick(B, Y, "b"), C: pick(C, Z, "u")}
        for i in range(n):
            p = chain_reach(g, choice, q.objectives[i].states)[A]
            assert (p == 1) == (i in X and i in Y and i in Z)
            assert p == Q("1/2") * (i in X) + Q("1/4") * (i in Y) + Q("1/4") * (i in Z)


def test_qbf_trivial():
    g, q = qbf_game(Qbf.parse("E x1", "x1"))
    assert q.connective == OR and q.n == 1
    with pytest.raises(ModelError):
        Qbf.parse("E x1", "x2")
    with pytest.raises(ModelError):
        Qbf.parse("Q x1", "x1")


@pytest.mark.parametrize("variant,n,x,expect", [
    ("qualitative", 2, None, "1"),
    ("quantitative-general", 2, None, "3/4"),
    ("quantitative-deterministic", 3, "1/2", "3/4"),
])
def test_reduction_thresholds(variant, n, x, expect):
    g, _ = random_sink_game(3, seed=1)
    objs = [reach({g.index_of("T1")}), reach({g.index_of("T2")}), reach({g.index_of("T12")})][:n]
    tq = ThresholdQuery(cq(*objs), (Q(x or "1"),) * n)
    ng, ntq = cq_to_dq_reduction(g, tq, variant)
    assert ntq.thresholds == (Q(expect),) * n
    assert ntq.template.connective == OR
    assert validate(ng) == []
    assert ng.n_states == g.n_states + 2 + n


def test_reduction_rejects_dq():
    g, q = build_named("intro")
    with pytest.raises(ModelError):
        cq_to_dq_reduction(g, ThresholdQuery(q, (Q(1), Q(1))))


@settings(max_examples=40)
@given(st.integers(3, 12), st.integers(0, 10_000))
def test_random_game_valid_and_reproducible(m, seed):
    l = 1
    g, q = random_game(m, l, seed)
    g2, _ = random_game(m, l, seed)
    assert validate(g) == []
    assert game_to_json(g) == game_to_json(g2)
    assert game_to_json(game_from_json(game_to_json(g))) == game_to_json(g)
    assert g.n_states == m
    assert len(q.objectives[0].states) == l
    assert m - len(q.objectives[1].states) == l
    for s in g.states():
        if s not in g.sinks():
            assert len(set(g.succ[s])) == 2 and s not in g.succ[s]


def test_random_game_bounds():
    for m, l in [(2, 1), (5, 0), (4, 2)]:
        with pytest.raises(ModelError):
            random_game(m, l, 0)


def test_experiment_config_bounds():
    with pytest.raises(ValueError):
        ExperimentConfig(m=2)
    with pytest.raises(ValueError):
        ExperimentConfig(horizons=())


def test_run_experiment_tiny(tmp_path):
    cfg = ExperimentConfig(instances=3, m=6, l=1, seed=0, horizons=(1, 2, 3), timeout=5.0)
    out = tmp_path / "t.csv"
    rows, runs, screened = run_experiment(cfg, csv_path=out)
    assert len(runs) == 3 and screened >= 3
    assert [r.k for r in rows] == [1, 2, 3]
    for r in runs:
        assert any(c > 1 for row in r.counts_pruned for c in row)
        for k in range(min(len(r.counts_pruned), len(r.counts_unpruned))):
            assert all(a <= b for a, b in zip(r.counts_pruned[k], r.counts_unpruned[k]))
    with open(out) as f:
        data = list(csv.reader(f))
    assert data[0] == ["instance_id", "seed", "k", "state", "count_pruned", "count_unpruned",
                       "timeout_pruned", "timeout_unpruned", "wall_ms"]
    assert len(data) == 1 + 3 * 3 * 6
