import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkit.core.graph import Dag, moralize
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd
from bnkit.datasets import chain_network, random_cpds, random_network, sprinkler_network
from bnkit.exceptions import ImpossibleEvidence, InvalidFixedOrder, NotCalibrated, UnknownVariable
from bnkit.infer.elimination import (
    HEURISTICS,
    MIN_FILL,
    MIN_NEIGHBOURS,
    elimination_order,
    greedy_order,
    induced_width,
    ve_query,
)
from bnkit.infer.evidence import Evidence
from bnkit.infer.junction import bp_query, build_junction_tree, calibrate

from oracles import enumerate_posterior


def _uniform_bn(dag):
    return random_cpds(dag, {n: 2 for n in dag.nodes}, seed=0)


def test_ve_examples():
    bn = chain_network()
    np.testing.assert_allclose(ve_query(bn, ["B"]).values, [0.5, 0.5], atol=1e-12)
    np.testing.assert_allclose(ve_query(bn, ["A"], {"B": 0}).values, [0.84, 0.16], atol=1e-12)
    np.testing.assert_allclose(ve_query(bn, ["A"]).values, [0.6, 0.4], atol=1e-12)
    flat = ve_query(bn, ["A"], Evidence(virtual={"B": [1.0, 1.0]}))
    np.testing.assert_allclose(flat.values, [0.6, 0.4], atol=1e-12)


def test_ve_sorts_scope_and_rejects_bad_queries():
    bn = sprinkler_network()
    assert ve_query(bn, ["W", "C"]).scope == ("C", "W")
    with pytest.raises(UnknownVariable):
        ve_query(bn, ["Q"])
    with pytest.raises(ValueError):
        ve_query(bn, ["C"], {"C": "T"})
    with pytest.raises(ValueError):
        ve_query(bn, [])


def test_impossible_evidence():
    bn = sprinkler_network()
    # W is certainly F when S = R = F
    with pytest.raises(ImpossibleEvidence):
        ve_query(bn, ["C"], {"S": "F", "R": "F", "W": "T"})
    with pytest.raises(ImpossibleEvidence):
        calibrate(build_junction_tree(bn), {"S": 0, "R": 0, "W": 1})


def test_elimination_order_examples():
    chain = _uniform_bn(Dag([("A", "B"), ("B", "C")]))
    assert elimination_order(chain, {"A", "B", "C"}, MIN_FILL) == ["A", "B", "C"]
    star = _uniform_bn(Dag([("X", "L1"), ("X", "L2"), ("X", "L3")]))
    order = elimination_order(star, {"X", "L1", "L2", "L3"}, MIN_NEIGHBOURS)
    assert order[:3] == ["L1", "L2", "L3"]
    cycle = {"A": {"B", "D"}, "B": {"A", "C"}, "C": {"B", "D"}, "D": {"A", "C"}}
    assert greedy_order(cycle, {n: 2 for n in "ABCD"}, "ABCD", MIN_FILL)[0] == "A"
    assert elimination_order(chain, {"A", "C"}, ["C", "A"]) == ["C", "A"]
    with pytest.raises(InvalidFixedOrder):
        elimination_order(chain, {"A", "C"}, ["A"])


def test_fixed_order_and_custom_heuristic_give_same_answer():
    bn = sprinkler_network()
    base = ve_query(bn, ["W"], {"C": 1})
    assert base.allclose(ve_query(bn, ["W"], {"C": 1}, ["R", "S"]), atol=1e-12)
    assert base.allclose(ve_query(bn, ["W"], {"C": 1}, lambda adj, v, cards: -len(adj[v])), atol=1e-12)


def test_junction_tree_examples():
    jt = build_junction_tree(_uniform_bn(Dag([("A", "B"), ("B", "C")])))
    assert sorted(jt.cliques) == [("A", "B"), ("B", "C")]
    assert len(jt.edges) == 1 and jt.separator(*jt.edges[0]) == ("B",)
    jt = build_junction_tree(_uniform_bn(Dag([("A", "C"), ("B", "C")])))
    assert jt.cliques == (("A", "B", "C"),)
    jt = build_junction_tree(sprinkler_network())
    assert sorted(jt.cliques) == [("C", "R", "S"), ("R", "S", "W")]
    assert jt.separator(*jt.edges[0]) == ("R", "S")


def test_bp_requires_calibration():
    with pytest.raises(NotCalibrated):
        bp_query(build_junction_tree(chain_network()), ["A"])


def test_calibration_properties():
    bn = sprinkler_network()
    ev = Evidence({"W": 1}, {"C": [0.3, 0.9]})
    cal = calibrate(build_junction_tree(bn), ev)
    for i, j in cal.edges:
        sep = set(cal.separator(i, j))
        mi = cal.beliefs[i].marginalize(set(cal.cliques[i]) - sep).sorted()
        mj = cal.beliefs[j].marginalize(set(cal.cliques[j]) - sep).sorted()
        assert np.max(np.abs(mi.values - mj.values)) <= 1e-10
    again = calibrate(cal, ev)
    for a, b in zip(cal.beliefs, again.beliefs):
        assert a.allclose(b, atol=1e-12)
    prior = calibrate(build_junction_tree(bn))
    for v in bn.nodes:
        np.testing.assert_allclose(bp_query(prior, [v]).values, enumerate_posterior(bn, [v]), atol=1e-12)
    # full clique scope is the normalized clique belief
    full = bp_query(cal, list(cal.cliques[0]))
    assert full.allclose(cal.beliefs[0].sorted(), atol=1e-12)


def test_log_evidence_is_probability_of_evidence():
    bn = chain_network()
    cal = calibrate(build_junction_tree(bn), {"A": 0, "B": 0})
    assert cal.log_evidence == pytest.approx(np.log(0.42), abs=1e-12)


def _random_case(seed):
    rng = np.random.default_rng(seed)
    bn = random_network(int(rng.integers(2, 7)), 0.4, max_card=3, seed=seed)
    nodes = list(bn.nodes)
    rng.shuffle(nodes)
    k_hard = int(rng.integers(0, len(nodes)))
    hard = {v: int(rng.integers(bn.card(v))) for v in nodes[:k_hard]}
    rest = nodes[k_hard:]
    virtual = {}
    for v in rest[1:]:
        if rng.random() < 0.3:
            virtual[v] = rng.random(bn.card(v)) + 0.05
    query = sorted(rng.choice(rest, int(rng.integers(1, min(2, len(rest)) + 1)), replace=False))
    return bn, query, hard, virtual


@given(st.integers(0, 100_000))
def test_ve_bp_and_enumeration_agree(seed):
    bn, query, hard, virtual = _random_case(seed)
    ev = Evidence(hard, virtual)
    try:
        oracle = enumerate_posterior(bn, query, hard, virtual)
    except FloatingPointError:  # pragma: no cover
        return
    if not np.all(np.isfinite(oracle)):
        with pytest.raises(ImpossibleEvidence):
            ve_query(bn, query, ev)
        return
    for h in HEURISTICS:
        assert np.max(np.abs(ve_query(bn, query, ev, h).values - oracle)) <= 1e-10
    cal = calibrate(build_junction_tree(bn), ev)
    assert np.max(np.abs(bp_query(cal, query).values - oracle)) <= 1e-10


@given(st.integers(0, 100_000))
def test_hard_evidence_equals_one_hot_virtual(seed):
    bn = random_network(5, 0.4, max_card=3, seed=seed)
    rng = np.random.default_rng(seed)
    x, q = rng.choice(bn.nodes, 2, replace=False)
    state = int(rng.integers(bn.card(x)))
    lik = np.zeros(bn.card(x))
    lik[state] = 1.0
    hard = ve_query(bn, [q], {x: state})
    soft = ve_query(bn, [q], Evidence(virtual={x: lik}))
    assert np.max(np.abs(hard.values - soft.values)) <= 1e-10


@given(st.integers(0, 100_000))
def test_min_fill_width_one_on_trees(seed):
    rng = np.random.default_rng(seed)
    n = int(rng.integers(2, 9))
    names = [f"V{i}" for i in range(n)]
    edges = [(names[int(rng.integers(i))], names[i]) for i in range(1, n)]
    bn = _uniform_bn(Dag(edges, names))
    order = elimination_order(bn, set(names), MIN_FILL)
    assert induced_width(moralize(bn.dag), order) == 1


def test_virtual_evidence_is_a_likelihood():
    bn = chain_network()
    out = ve_query(bn, ["A"], Evidence(virtual={"B": [0.9, 0.1]}))
    unnorm = np.array([0.6 * (0.7 * 0.9 + 0.3 * 0.1), 0.4 * (0.2 * 0.9 + 0.8 * 0.1)])
    np.testing.assert_allclose(out.values, unnorm / unnorm.sum(), atol=1e-12)
    # two likelihoods on separate nodes compose multiplicatively
    scaled = ve_query(bn, ["A"], Evidence(virtual={"B": [9.0, 1.0]}))
    assert out.allclose(scaled, atol=1e-12)


def test_evidence_validation():
    with pytest.raises(Exception):
        Evidence({"A": 0}, {"A": [1, 1]})
    with pytest.raises(Exception):
        Evidence(virtual={"A": [0, 0]})
    bn = DiscreteBayesianNetwork([TabularCpd("A", 2, [0.5, 0.5])])
    with pytest.raises(Exception):
        ve_query(bn, ["A"], Evidence(virtual={"A": [1, 1, 1]}))
