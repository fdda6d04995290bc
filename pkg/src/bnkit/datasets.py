"""Small reference networks and random model generators."""

from __future__ import annotations

import numpy as np

from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd, VariableMeta


def chain_network() -> DiscreteBayesianNetwork:
    """A -> B with P(A) = [0.6, 0.4], P(B=0|A=0) = 0.7, P(B=0|A=1) = 0.2."""
    return DiscreteBayesianNetwork(
        [
            TabularCpd("A", 2, [0.6, 0.4]),
            TabularCpd("B", 2, [[0.7, 0.3], [0.2, 0.8]], ["A"], [2]),
        ]
    )


def sprinkler_network() -> DiscreteBayesianNetwork:
    """Cloudy -> {Sprinkler, Rain} -> WetGrass, with the usual textbook CPDs.

    Variables are ``C``, ``S``, ``R``, ``W``; state 0 is "false".
    """
    fs = ("F", "T")
    return DiscreteBayesianNetwork(
        [
            TabularCpd("C", 2, [0.5, 0.5]),
            TabularCpd("S", 2, [[0.5, 0.5], [0.9, 0.1]], ["C"], [2]),
            TabularCpd("R", 2, [[0.8, 0.2], [0.2, 0.8]], ["C"], [2]),
            TabularCpd(
                "W",
                2,
                [[1.0, 0.0], [0.1, 0.9], [0.1, 0.9], [0.01, 0.99]],
                ["S", "R"],
                [2, 2],
            ),
        ],
        metas=[VariableMeta(n, fs) for n in "CSRW"],
    )


def random_dag(n_nodes, edge_prob=0.3, seed=None, names=None) -> Dag:
    """Random DAG: edges only go from earlier to later in a random permutation."""
    rng = np.random.default_rng(seed)
    names = list(names) if names is not None else [f"X{i}" for i in range(n_nodes)]
    perm = rng.permutation(n_nodes)
    edges = []
    for i in range(n_nodes):
        for j in range(i + 1, n_nodes):
            if rng.random() < edge_prob:
                edges.append((names[perm[i]], names[perm[j]]))
    return Dag(edges, nodes=names)


def random_cpds(dag: Dag, cards, seed=None, alpha=1.0) -> DiscreteBayesianNetwork:
    """Parameterize ``dag`` with Dirichlet(alpha) CPD rows."""
    rng = np.random.default_rng(seed)
    if isinstance(cards, int):
        cards = {n: cards for n in dag.nodes}
    cpds = []
    for n in dag.sorted_nodes():
        parents = dag.parents(n)
        pc = [cards[p] for p in parents]
        q = int(np.prod(pc)) if pc else 1
        table = rng.dirichlet([alpha] * cards[n], size=q)
        # keep rows exactly normalized after float division
        table = table / table.sum(axis=1, keepdims=True)
        cpds.append(TabularCpd(n, cards[n], table, parents, pc))
    return DiscreteBayesianNetwork(cpds)


def random_network(n_nodes, edge_prob=0.3, max_card=3, seed=None) -> DiscreteBayesianNetwork:
    rng = np.random.default_rng(seed)
    dag = random_dag(n_nodes, edge_prob, seed=rng)
    cards = {n: int(rng.integers(2, max_card + 1)) for n in dag.sorted_nodes()}
    return random_cpds(dag, cards, seed=rng)
