import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkit.core.data import MISSING, DataTable
from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd, VariableMeta
from bnkit.datasets import chain_network, random_network
from bnkit.exceptions import InvalidModel, InvalidPrior, MissingDataPresent, UnknownVariable
from bnkit.fit import BDeuPrior, DirichletPrior, EmConfig, bayes_fit, em_fit, mle_fit
from bnkit.metrics import log_likelihood
from bnkit.simulate import forward_sample

from conftest import table_from_counts

CHAIN = Dag([("A", "B")])


def _with_missing(data, fraction, seed, columns=None):
    rng = np.random.default_rng(seed)
    codes = data.codes.copy()
    cols = range(codes.shape[1]) if columns is None else [data.index(c) for c in columns]
    for j in cols:
        codes[rng.random(data.n_rows) < fraction, j] = MISSING
    return DataTable(data.metas, codes)


def test_mle_examples():
    root = mle_fit(Dag(nodes=["X"]), table_from_counts(["X"], [7, 3]))
    assert root.cpd("X").table().tolist() == [[0.7, 0.3]]
    counts = np.array([[14, 6], [0, 0]])
    fam = mle_fit(CHAIN, table_from_counts(["A", "B"], counts))
    assert fam.cpd("B").table().tolist() == [[0.7, 0.3], [0.5, 0.5]]
    chain = mle_fit(CHAIN, table_from_counts(["A", "B"], [[7, 3], [2, 8]]))
    assert chain.cpd("A").table().tolist() == [[0.5, 0.5]]
    assert chain.cpd("B").table().tolist() == [[0.7, 0.3], [0.2, 0.8]]


def test_mle_uses_row_weights():
    data = DataTable([VariableMeta("X", ("a", "b"))], np.array([[0], [1]]), weights=[7.0, 3.0])
    assert mle_fit(Dag(nodes=["X"]), data).cpd("X").table().tolist() == [[0.7, 0.3]]


def test_mle_errors():
    data = table_from_counts(["A", "B"], [[7, 3], [2, 8]])
    with pytest.raises(MissingDataPresent) as info:
        mle_fit(CHAIN, _with_missing(data, 0.5, 0))
    assert "em_fit" in str(info.value)
    with pytest.raises(UnknownVariable):
        mle_fit(Dag([("A", "Q")]), data)


def test_bayes_examples():
    single = table_from_counts(["X"], [7, 3])
    dag = Dag(nodes=["X"])
    assert bayes_fit(dag, single, "k2").cpd("X").table().tolist() == [[8 / 12, 4 / 12]]
    assert bayes_fit(dag, single, "bdeu", ess=2).cpd("X").table().tolist() == [[8 / 12, 4 / 12]]
    assert bayes_fit(dag, single, BDeuPrior(2.0)).cpd("X").table().tolist() == [[8 / 12, 4 / 12]]
    empty = DataTable([VariableMeta("A", ("0", "1")), VariableMeta("B", ("0", "1", "2"))], np.zeros((0, 2), dtype=np.int64))
    fit = bayes_fit(CHAIN, empty, "k2")
    assert np.allclose(fit.cpd("B").table(), 1 / 3) and np.allclose(fit.cpd("A").table(), 0.5)


@given(st.lists(st.integers(0, 30), min_size=4, max_size=4))
def test_k2_equals_add_one_closed_form(cells):
    counts = np.array(cells).reshape(2, 2)
    fit = bayes_fit(CHAIN, table_from_counts(["A", "B"], counts), "k2")
    expected_a = (counts.sum(axis=1) + 1) / (counts.sum() + 2)
    expected_b = (counts + 1) / (counts.sum(axis=1, keepdims=True) + 2)
    assert fit.cpd("A").table()[0].tolist() == expected_a.tolist()
    assert fit.cpd("B").table().tolist() == expected_b.tolist()


def test_bayes_prior_errors():
    data = table_from_counts(["A", "B"], [[7, 3], [2, 8]])
    with pytest.raises(InvalidPrior):
        bayes_fit(CHAIN, data, "nope")
    with pytest.raises(InvalidPrior):
        bayes_fit(CHAIN, data, "bdeu", ess=0)
    with pytest.raises(InvalidPrior):
        bayes_fit(CHAIN, data, {"A": [1, 1], "B": [1, 1, 1]})
    with pytest.raises(InvalidPrior):
        bayes_fit(CHAIN, data, {"A": [1, 1]})
    with pytest.raises(InvalidPrior):
        DirichletPrior({"A": [0, 1]})


def test_dirichlet_limit_is_mle():
    data = forward_sample(chain_network(), 500, seed=1)
    eps = {"A": np.full(2, 1e-8), "B": np.full((2, 2), 1e-8)}
    diff = np.abs(bayes_fit(CHAIN, data, eps).cpd("B").table() - mle_fit(CHAIN, data).cpd("B").table())
    assert diff.max() <= 1e-6


@given(st.integers(0, 10_000))
def test_mle_maximizes_likelihood(seed):
    bn = random_network(3, 0.6, seed=seed)
    data = forward_sample(bn, 200, seed=seed)
    best = log_likelihood(mle_fit(bn.dag, data), data)
    rng = np.random.default_rng(seed)
    for _ in range(20):
        cpds = []
        for n in bn.nodes:
            cpd = bn.cpd(n)
            table = rng.dirichlet(np.ones(cpd.child_card), size=cpd.table().shape[0])
            cpds.append(TabularCpd(n, cpd.child_card, table, cpd.parents, cpd.parent_cards))
        other = DiscreteBayesianNetwork(cpds, metas=[bn.metas[n] for n in bn.nodes])
        assert log_likelihood(other, data) <= best + 1e-9


def test_em_on_complete_data_equals_mle():
    data = forward_sample(chain_network(), 1000, seed=2)
    result = em_fit(CHAIN, data)
    mle = mle_fit(CHAIN, data)
    for n in ("A", "B"):
        assert np.abs(result.model.cpd(n).table() - mle.cpd(n).table()).max() <= 1e-8
    assert result.converged and result.n_iter <= 2


@given(st.integers(0, 10_000))
def test_em_trace_is_non_decreasing(seed):
    bn = random_network(4, 0.5, seed=seed)
    data = _with_missing(forward_sample(bn, 150, seed=seed), 0.3, seed)
    trace = em_fit(bn.dag, data, config=EmConfig(max_iter=30, tol=1e-6, seed=seed)).log_likelihoods
    assert all(b >= a - 1e-9 for a, b in zip(trace, trace[1:]))


def test_em_symmetric_initialization_stays_symmetric():
    dag = Dag([("H", "X")])
    data = forward_sample(chain_network(), 300, seed=5).select(["B"])
    data = DataTable([VariableMeta("X", data.meta("B").states)], data.codes)
    metas = [VariableMeta("H", ("0", "1")), VariableMeta("X", data.meta("X").states)]
    init = DiscreteBayesianNetwork(
        [TabularCpd("H", 2, [[0.5, 0.5]]), TabularCpd("X", 2, [[0.3, 0.7], [0.3, 0.7]], ["H"], [2])], metas
    )
    result = em_fit(dag, data, latents={"H"}, config=EmConfig(max_iter=5), init=init)
    table = result.model.cpd("X").table()
    assert np.allclose(table[0], table[1], atol=1e-12)
    assert result.model.cpd("H").table().tolist() == [[0.5, 0.5]]


def test_em_recovers_chain_under_mcar():
    data = _with_missing(forward_sample(chain_network(), 10_000, seed=7), 0.3, 8, columns=["B"])
    result = em_fit(CHAIN, data, config=EmConfig(max_iter=200, tol=1e-8))
    truth = chain_network().cpd("B").table()
    assert np.abs(result.model.cpd("B").table() - truth).max() <= 0.03


def test_em_latent_model_and_errors():
    data = forward_sample(chain_network(), 200, seed=1)
    dag = Dag([("H", "A"), ("H", "B")])
    result = em_fit(dag, data, latents={"H"}, latent_states={"H": 3})
    assert result.model.metas["H"].card == 3 and result.model.latents == {"H"}
    with pytest.raises(UnknownVariable):
        em_fit(dag, data)
    with pytest.raises(UnknownVariable):
        em_fit(CHAIN, data, latents={"Q"})
    with pytest.raises(InvalidModel):
        em_fit(CHAIN, data, latents={"B"})
    with pytest.raises(ValueError):
        EmConfig(max_iter=0)
