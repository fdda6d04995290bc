import itertools
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from scipy.special import gammaln
from scipy.stats import chi2_contingency

from bnkit.core.data import MISSING, DataTable
from bnkit.core.graph import Dag
from bnkit.core.network import VariableMeta
from bnkit.datasets import chain_network, random_dag, random_network, sprinkler_network
from bnkit.exceptions import InsufficientData, InvalidAlpha, InvalidConstraints, UnknownVariable
from bnkit.learn import (
    BDeu,
    BDs,
    CiResult,
    GTest,
    chow_liu,
    ci_test,
    cpdag_of,
    hill_climb,
    local_score,
    mmhc,
    mmpc,
    pc_stable,
    tan,
)
from bnkit.learn.hillclimb import ScoreCache, legal_moves, move_delta
from bnkit.learn.scores import get_score
from bnkit.learn.trees import maximum_spanning_tree, mutual_information
from bnkit.simulate import forward_sample

from conftest import table_from_counts
from oracles import cpdag_by_enumeration, empirical_mi, spanning_trees


def _pdag_sets(pdag):
    return set(pdag.directed), set(pdag.undirected)


# -- CI tests ------------------------------------------------------------------


def test_ci_examples():
    flat = table_from_counts(["X", "Y"], [[25, 25], [25, 25]])
    r = ci_test(flat, "X", "Y")
    assert r.statistic == pytest.approx(0.0, abs=1e-12) and r.p_value == pytest.approx(1.0)
    assert ci_test(flat, "X", "Y", method=GTest).statistic == pytest.approx(0.0, abs=1e-12)
    tied = table_from_counts(["X", "Y"], [[50, 0], [0, 50]])
    r = ci_test(tied, "X", "Y")
    assert r.statistic == pytest.approx(100.0) and r.dof == 1 and r.p_value < 1e-20
    assert not r.independent(0.05)


@given(st.lists(st.integers(1, 40), min_size=6, max_size=6))
def test_chi_square_and_g_match_scipy(cells):
    counts = np.array(cells).reshape(2, 3)
    data = table_from_counts(["X", "Y"], counts)
    stat, p, dof, _ = chi2_contingency(counts, correction=False)
    r = ci_test(data, "X", "Y", method="chi_square")
    assert r.statistic == pytest.approx(stat, rel=1e-9, abs=1e-9)
    assert r.p_value == pytest.approx(p, rel=1e-9, abs=1e-12) and r.dof == dof
    g, pg, _, _ = chi2_contingency(counts, correction=False, lambda_="log-likelihood")
    r = ci_test(data, "X", "Y", method="g_test")
    assert r.statistic == pytest.approx(g, rel=1e-9, abs=1e-9)
    assert r.p_value == pytest.approx(pg, rel=1e-9, abs=1e-12)


def test_ci_conditional_sums_strata_and_drops_empty_levels():
    counts = np.zeros((2, 2, 2), dtype=int)
    counts[:, :, 0] = [[50, 0], [0, 50]]
    counts[:, :, 1] = [[25, 25], [25, 25]]
    r = ci_test(table_from_counts(["X", "Y", "Z"], counts), "X", "Y", ["Z"])
    assert r.statistic == pytest.approx(100.0) and r.dof == 2
    # a state that never occurs in a stratum reduces that stratum's dof
    counts = np.zeros((3, 2), dtype=int)
    counts[:2] = [[10, 5], [5, 10]]
    assert ci_test(table_from_counts(["X", "Y"], counts), "X", "Y").dof == 1


def test_ci_errors_and_custom_callable():
    data = table_from_counts(["X", "Y"], [[5, 5], [5, 5]])
    with pytest.raises(ValueError):
        ci_test(data, "X", "X")
    with pytest.raises(ValueError):
        ci_test(data, "X", "Y", ["X"])
    with pytest.raises(UnknownVariable):
        ci_test(data, "X", "Q")
    with pytest.raises(ValueError):
        ci_test(data, "X", "Y", method="nope")
    assert ci_test(data, "X", "Y", method=lambda d, x, y, z: CiResult(1.0, 1, 0.5)).p_value == 0.5
    with pytest.raises(TypeError):
        ci_test(data, "X", "Y", method=lambda d, x, y, z: 0.5)
    empty = DataTable([VariableMeta("X", ("0", "1")), VariableMeta("Y", ("0", "1"))], np.full((3, 2), MISSING))
    with pytest.raises(InsufficientData):
        ci_test(empty, "X", "Y")


# -- PC ------------------------------------------------------------------------


def test_pc_oracle_examples():
    chain = pc_stable(Dag([("A", "B"), ("B", "C")]))
    assert chain.directed == frozenset() and _pdag_sets(chain)[1] == {frozenset("AB"), frozenset("BC")}
    collider = pc_stable(Dag([("A", "C"), ("B", "C")]))
    assert set(collider.directed) == {("A", "C"), ("B", "C")} and not collider.undirected
    empty = pc_stable(Dag(nodes=["A", "B", "C"]))
    assert not empty.directed and not empty.undirected and empty.nodes == {"A", "B", "C"}
    # Meek rule 1 orients C -> D after the v-structure at C
    meek = pc_stable(Dag([("A", "C"), ("B", "C"), ("C", "D")]))
    assert ("C", "D") in meek.directed


@given(st.integers(0, 10_000))
def test_cpdag_of_matches_mec_enumeration(seed):
    dag = random_dag(6, 0.4, seed=seed)
    directed, undirected = cpdag_by_enumeration(dag.sorted_nodes(), dag.sorted_edges())
    assert _pdag_sets(cpdag_of(dag)) == (directed, undirected)
    assert _pdag_sets(pc_stable(dag)) == (directed, undirected)


def test_pc_on_data_and_row_order_invariance():
    data = forward_sample(sprinkler_network(), 5000, seed=2)
    pdag = pc_stable(data, alpha=0.01)
    assert _pdag_sets(pdag) == _pdag_sets(cpdag_of(sprinkler_network().dag))
    perm = np.random.default_rng(0).permutation(data.n_rows)
    shuffled = DataTable(data.metas, data.codes[perm])
    assert _pdag_sets(pc_stable(shuffled, alpha=0.01)) == _pdag_sets(pdag)


def test_pc_alpha_validation():
    data = table_from_counts(["X", "Y"], [[5, 5], [5, 5]])
    for bad in (0, 1, 1.5, -0.1, "0.05"):
        with pytest.raises(InvalidAlpha):
            pc_stable(data, alpha=bad)


# -- scores --------------------------------------------------------------------


def test_score_examples():
    single = table_from_counts(["X"], [7, 3])
    ll = 7 * math.log(0.7) + 3 * math.log(0.3)
    assert ll == pytest.approx(-6.1086430205, abs=1e-9)
    assert local_score("X", [], single, "bic") == pytest.approx(ll - 0.5 * math.log(10), abs=1e-12)
    assert local_score("X", [], single, "bic") == pytest.approx(-7.259935567045959, abs=1e-12)
    assert local_score("X", [], single, "aic") == pytest.approx(ll - 1, abs=1e-12)
    k2 = gammaln(2) - gammaln(12) + gammaln(8) + gammaln(4)
    assert local_score("X", [], single, "k2") == pytest.approx(k2, abs=1e-12)
    bdeu = gammaln(1) - gammaln(11) + 2 * -gammaln(0.5) + gammaln(7.5) + gammaln(3.5)
    assert local_score("X", [], single, BDeu(1.0)) == pytest.approx(bdeu, abs=1e-12)


def test_score_name_resolution_and_errors():
    assert get_score("bdeu", ess=5).ess == 5
    assert get_score("BIC-D").name == "bic" and get_score("k2score").name == "k2"
    with pytest.raises(ValueError):
        get_score("nope")
    with pytest.raises(ValueError):
        BDeu(0)
    data = table_from_counts(["X", "Y"], [[5, 5], [5, 5]])
    with pytest.raises(ValueError):
        local_score("X", ["X"], data)
    assert local_score("X", ["Y"], data, lambda c, p, d: 1.5) == 1.5


@given(st.integers(0, 10_000), st.sampled_from(["bic", "aic", "k2", "bdeu", "bds"]))
def test_scores_decompose_over_families(seed, method):
    bn = random_network(4, 0.5, seed=seed)
    data = forward_sample(bn, 300, seed=seed)
    score = get_score(method)
    cache = ScoreCache(data, score)
    parents = {n: set(bn.dag.parents(n)) for n in bn.nodes}
    assert cache.total(parents) == pytest.approx(sum(score(n, sorted(parents[n]), data) for n in bn.nodes))


def test_bds_equals_bdeu_when_every_configuration_is_observed():
    data = forward_sample(chain_network(), 500, seed=4)
    for ess in (0.5, 1.0, 10.0):
        assert local_score("B", ["A"], data, BDs(ess)) == pytest.approx(local_score("B", ["A"], data, BDeu(ess)))
    counts = np.zeros((3, 2), dtype=int)
    counts[:2] = [[10, 5], [5, 10]]
    sparse = table_from_counts(["P", "C"], counts)
    assert local_score("C", ["P"], sparse, BDs(1.0)) != pytest.approx(local_score("C", ["P"], sparse, BDeu(1.0)))


def test_bic_is_score_equivalent():
    data = forward_sample(chain_network(), 800, seed=8)
    forward = local_score("A", [], data) + local_score("B", ["A"], data)
    backward = local_score("B", [], data) + local_score("A", ["B"], data)
    assert forward == pytest.approx(backward, abs=1e-9)


# -- hill climbing -------------------------------------------------------------


@given(st.integers(0, 10_000))
def test_move_delta_equals_full_rescoring(seed):
    bn = random_network(4, 0.4, seed=seed)
    data = forward_sample(bn, 200, seed=seed)
    cache = ScoreCache(data, get_score("bic"))
    nodes = sorted(bn.nodes)
    parents = {n: set(bn.dag.parents(n)) for n in nodes}
    children = {n: set(bn.dag.children(n)) for n in nodes}
    before = cache.total(parents)
    for op, (u, v) in legal_moves(parents, children, nodes, None, set(), set(), set()):
        after = {n: set(p) for n, p in parents.items()}
        if op in ("-", "flip"):
            after[v].discard(u)
        if op == "+":
            after[v].add(u)
        if op == "flip":
            after[u].add(v)
        Dag([(p, c) for c in nodes for p in after[c]], nodes=nodes)  # acyclic
        assert move_delta(cache, parents, (op, (u, v))) == pytest.approx(cache.total(after) - before, abs=1e-9)


def test_hill_climb_examples():
    dependent = table_from_counts(["A", "B"], [[45, 5], [5, 45]])
    assert len(hill_climb(dependent).edges) == 1
    independent = table_from_counts(["A", "B"], [[25, 25], [25, 25]])
    assert hill_climb(independent).edges == frozenset()


def test_hill_climb_trace_is_monotone_and_ends_at_a_local_optimum():
    data = forward_sample(sprinkler_network(), 2000, seed=6)
    dag, trace = hill_climb(data, "bic", return_trace=True)
    assert all(b > a for a, b in zip(trace, trace[1:]))
    cache = ScoreCache(data, get_score("bic"))
    parents = {n: set(dag.parents(n)) for n in dag.nodes}
    assert trace[-1] == pytest.approx(cache.total(parents))
    nodes = sorted(dag.nodes)
    children = {n: set(dag.children(n)) for n in nodes}
    assert all(move_delta(cache, parents, m) <= 1e-9 for m in legal_moves(parents, children, nodes, None, set(), set(), set()))


def test_hill_climb_constraints():
    data = forward_sample(sprinkler_network(), 2000, seed=6)
    dag = hill_climb(data, whitelist=[("C", "W")], blacklist=[("S", "W"), ("W", "S")], max_indegree=1)
    assert ("C", "W") in dag.edges
    assert ("S", "W") not in dag.edges and ("W", "S") not in dag.edges
    assert all(len(dag.parents(n)) <= 1 for n in dag.nodes)
    with pytest.raises(InvalidConstraints):
        hill_climb(data, whitelist=[("C", "S")], blacklist=[("C", "S")])
    with pytest.raises(InvalidConstraints):
        hill_climb(data, whitelist=[("C", "S"), ("S", "C")])
    with pytest.raises(UnknownVariable):
        hill_climb(data, blacklist=[("C", "Q")])
    with pytest.raises(InvalidConstraints):
        hill_climb(data, start=Dag(nodes=["C"]))


def test_hill_climb_is_deterministic_given_seed():
    data = forward_sample(sprinkler_network(), 1000, seed=12)
    a = hill_climb(data, seed=4, return_trace=True)
    b = hill_climb(data, seed=4, return_trace=True)
    assert a[0].edges == b[0].edges and a[1] == b[1]


# -- MMPC / MMHC ---------------------------------------------------------------


def test_mmpc_oracle_chain():
    cands = mmpc(Dag([("A", "B"), ("B", "C")]))
    assert cands == {"A": {"B"}, "B": {"A", "C"}, "C": {"B"}}


@given(st.integers(0, 10_000))
def test_mmpc_oracle_is_symmetric_and_recovers_neighbours(seed):
    dag = random_dag(6, 0.35, seed=seed)
    cands = mmpc(dag)
    for t, cs in cands.items():
        for c in cs:
            assert t in cands[c]
        assert cs == set(dag.neighbors(t))


def test_mmhc_respects_candidates():
    data = forward_sample(sprinkler_network(), 3000, seed=1)
    cands = mmpc(data, 0.05)
    dag = mmhc(data, 0.05)
    for u, v in dag.edges:
        assert v in cands[u]
    assert {frozenset(e) for e in dag.edges} == {frozenset(e) for e in sprinkler_network().dag.edges}


# -- trees ---------------------------------------------------------------------


def test_mutual_information_matches_plugin_oracle():
    data = forward_sample(chain_network(), 1000, seed=7)
    assert mutual_information(data, "A", "B") == pytest.approx(
        empirical_mi(data.column("A"), data.column("B")), abs=1e-12
    )


def test_maximum_spanning_tree_examples():
    w = {("A", "B"): 3.0, ("A", "C"): 1.0, ("B", "C"): 2.0}
    assert maximum_spanning_tree(["A", "B", "C"], w) == [("A", "B"), ("B", "C")]
    tie = {("A", "B"): 1.0, ("A", "C"): 1.0, ("B", "C"): 1.0}
    assert maximum_spanning_tree(["A", "B", "C"], tie) == [("A", "B"), ("A", "C")]


@given(st.integers(0, 10_000))
def test_chow_liu_is_a_maximum_spanning_tree(seed):
    bn = random_network(5, 0.5, seed=seed)
    data = forward_sample(bn, 200, seed=seed)
    nodes = sorted(data.columns)
    w = {(a, b): mutual_information(data, a, b) for a, b in itertools.combinations(nodes, 2)}
    best = max(sum(w[tuple(sorted(e))] for e in t) for t in spanning_trees(nodes))
    dag = chow_liu(data)
    assert len(dag.edges) == 4
    assert sum(w[tuple(sorted(e))] for e in dag.edges) == pytest.approx(best, abs=1e-12)
    assert not dag.parents(nodes[0])


def test_chow_liu_options():
    data = forward_sample(sprinkler_network(), 1000, seed=3)
    for weight in ("mutual_info", "normalized_mutual_info", "adjusted_mutual_info"):
        dag = chow_liu(data, weight, root="W")
        assert len(dag.edges) == 3 and not dag.parents("W")
    with pytest.raises(ValueError):
        chow_liu(data, "nope")
    with pytest.raises(UnknownVariable):
        chow_liu(data, root="Q")


def test_tan_shape():
    data = forward_sample(sprinkler_network(), 1000, seed=3)
    dag = tan(data, "C")
    features = ["R", "S", "W"]
    assert not dag.parents("C")
    for f in features:
        assert "C" in dag.parents(f)
    assert len(dag.edges) == 2 * len(features) - 1
    assert set(dag.parents("R")) == {"C"}
    with pytest.raises(UnknownVariable):
        tan(data, "Q")
