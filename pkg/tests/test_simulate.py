import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from bnkit.core.network import TabularCpd
from bnkit.datasets import chain_network, random_network, sprinkler_network
from bnkit.exceptions import CardinalityMismatch, ImpossibleEvidence, IncompatibleSpec
from bnkit.infer.elimination import ve_query
from bnkit.io import write_csv
from bnkit.simulate import SimulationSpec, approx_query, forward_sample, intervene, simulate

from oracles import total_variation


def _weighted_freq(data, var, state):
    w = data.row_weights()
    return float(w[data.column(var) == state].sum() / w.sum())


def test_forward_sample_examples():
    data = forward_sample(chain_network(), 100_000, seed=3)
    assert 0.59 <= _weighted_freq(data, "A", 0) <= 0.61
    point = intervene(chain_network(), hard={"A": 1})
    assert np.all(forward_sample(point, 500, seed=1).column("A") == 1)
    a, b = forward_sample(sprinkler_network(), 1000, 9), forward_sample(sprinkler_network(), 1000, 9)
    assert write_csv(a) == write_csv(b)
    assert a.weights is None or np.all(a.weights == 1.0)


def test_simulate_examples():
    bn = chain_network()
    do = simulate(bn, SimulationSpec(n=100_000, seed=1, hard_intervention={"B": 1}))
    assert abs(_weighted_freq(do, "A", 0) - 0.6) <= 0.01
    assert np.all(do.column("B") == 1)
    ev = simulate(bn, SimulationSpec(n=100_000, seed=2, hard_evidence={"B": 0}))
    assert abs(_weighted_freq(ev, "A", 0) - 0.84) <= 0.01
    uniform = TabularCpd("B", 2, [[0.5, 0.5], [0.5, 0.5]], ["A"], [2])
    vi = simulate(bn, SimulationSpec(n=100_000, seed=3, virtual_intervention={"B": uniform}))
    assert abs(_weighted_freq(vi, "B", 0) - 0.5) <= 0.01


def test_weights_are_one_without_evidence():
    data = simulate(sprinkler_network(), SimulationSpec(n=2000, seed=4, hard_intervention={"S": "T"}))
    assert np.all(data.row_weights() == 1.0)


def test_virtual_evidence_weights_rows():
    bn = chain_network()
    lik = [0.9, 0.1]
    data = simulate(bn, SimulationSpec(n=200_000, seed=5, virtual_evidence={"B": lik}))
    from bnkit.infer.evidence import Evidence

    exact = ve_query(bn, ["A"], Evidence(virtual={"B": lik})).values
    assert abs(_weighted_freq(data, "A", 0) - exact[0]) <= 0.01


def test_rejection_mode_keeps_only_matching_rows():
    data = simulate(chain_network(), SimulationSpec(n=5000, seed=6, hard_evidence={"B": 0}, method="rejection"))
    assert data.n_rows < 5000 and np.all(data.column("B") == 0)
    assert abs(_weighted_freq(data, "A", 0) - 0.84) <= 0.03


def test_spec_validation():
    with pytest.raises(IncompatibleSpec):
        SimulationSpec(n=10, hard_evidence={"A": 0}, hard_intervention={"A": 1})
    with pytest.raises(IncompatibleSpec):
        SimulationSpec(n=0)
    with pytest.raises(IncompatibleSpec):
        SimulationSpec(n=5, method="gibbs")
    bad = TabularCpd("B", 3, [[1 / 3] * 3] * 2, ["A"], [2])
    with pytest.raises(CardinalityMismatch):
        simulate(chain_network(), SimulationSpec(n=5, virtual_intervention={"B": bad}))
    wrong_parents = TabularCpd("B", 2, [0.5, 0.5])
    with pytest.raises(IncompatibleSpec):
        simulate(chain_network(), SimulationSpec(n=5, virtual_intervention={"B": wrong_parents}))


def test_approx_query_examples():
    bn = chain_network()
    f, ess = approx_query(bn, ["B"], n=100_000, seed=1)
    assert total_variation(f.values, [0.5, 0.5]) <= 0.01
    assert ess == pytest.approx(100_000)
    f, ess = approx_query(bn, ["A"], {"B": 0}, n=100_000, seed=2)
    assert total_variation(f.values, [0.84, 0.16]) <= 0.02
    assert 0 < ess < 100_000
    from bnkit.infer.evidence import Evidence

    f, _ = approx_query(bn, ["A"], Evidence(virtual={"A": [0.0, 1.0]}), n=1000, seed=3)
    np.testing.assert_allclose(f.values, [0.0, 1.0])


def test_approx_query_impossible_evidence():
    with pytest.raises(ImpossibleEvidence):
        approx_query(sprinkler_network(), ["C"], {"S": "F", "R": "F", "W": "T"}, n=2000, seed=1)


def test_block_structure_is_invisible():
    # rows of a longer run extend a shorter run with the same seed
    bn = sprinkler_network()
    short = forward_sample(bn, 5000, seed=11)
    long = forward_sample(bn, 9000, seed=11)
    assert np.array_equal(long.codes[:5000], short.codes)


@given(st.integers(0, 10_000), st.integers(0, 2**31 - 1))
def test_seed_determinism(model_seed, seed):
    bn = random_network(4, 0.5, max_card=3, seed=model_seed)
    v = bn.nodes[0]
    spec = SimulationSpec(n=50, seed=seed, hard_evidence={v: 0})
    assert write_csv(simulate(bn, spec)) == write_csv(simulate(bn, spec))
