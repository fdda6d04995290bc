"""Maximum-likelihood and Bayesian CPD estimation for a fixed DAG."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bnkit.core.data import DataTable
from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd
from bnkit.exceptions import InvalidPrior, MissingDataPresent


@dataclass(frozen=True)
class K2Prior:
    """One pseudo-count per CPD cell."""


@dataclass(frozen=True)
class BDeuPrior:
    """``ess / (r * q)`` pseudo-counts per cell."""

    ess: float = 1.0

    def __post_init__(self):
        if not self.ess > 0:
            raise InvalidPrior(f"equivalent sample size must be positive, got {self.ess}")


@dataclass(frozen=True)
class DirichletPrior:
    """Explicit pseudo-counts: ``{node: array of shape parent_cards + (card,)}``."""

    pseudo_counts: dict = field(default_factory=dict)

    def __post_init__(self):
        checked = {}
        for node, arr in self.pseudo_counts.items():
            arr = np.asarray(arr, dtype=float)
            if not np.all(np.isfinite(arr)) or np.any(arr <= 0):
                raise InvalidPrior(f"pseudo-counts for {node!r} must be positive")
            checked[node] = arr
        object.__setattr__(self, "pseudo_counts", checked)


def get_prior(prior, ess=None):
    if isinstance(prior, (K2Prior, BDeuPrior, DirichletPrior)):
        return prior
    if isinstance(prior, dict):
        return DirichletPrior(prior)
    name = str(prior).lower()
    if name == "k2":
        return K2Prior()
    if name == "bdeu":
        return BDeuPrior(1.0 if ess is None else ess)
    raise InvalidPrior(f"unknown prior {prior!r}; use 'k2', 'bdeu' or a DirichletPrior")


def family_counts(dag: Dag, data: DataTable, node) -> np.ndarray:
    """Weighted counts shaped ``parent_cards + (card,)``, parents sorted."""
    return data.counts(list(dag.parents(node)) + [node])


def cpd_from_counts(node, parents, counts) -> TabularCpd:
    """Row-normalize ``counts``; all-zero rows become uniform."""
    counts = np.asarray(counts, dtype=float)
    r = counts.shape[-1]
    flat = counts.reshape(-1, r)
    totals = flat.sum(axis=1, keepdims=True)
    table = np.divide(flat, totals, out=np.full_like(flat, 1.0 / r), where=totals > 0)
    return TabularCpd(node, r, table, parents, counts.shape[:-1])


def _check_complete(dag, data):
    for n in dag.nodes:
        data.index(n)
    if data.has_missing(dag.sorted_nodes()):
        raise MissingDataPresent()


def _network(dag, data, cpds):
    return DiscreteBayesianNetwork(
        cpds,
        metas=[data.meta(n) for n in dag.sorted_nodes()],
        latents=data.latents & dag.nodes,
    )


def mle_fit(dag: Dag, data: DataTable) -> DiscreteBayesianNetwork:
    """Weighted empirical conditional frequencies.

    Parent configurations never observed get a uniform row.
    """
    _check_complete(dag, data)
    cpds = [
        cpd_from_counts(n, dag.parents(n), family_counts(dag, data, n))
        for n in dag.sorted_nodes()
    ]
    return _network(dag, data, cpds)


def pseudo_counts(prior, node, shape) -> np.ndarray:
    r = shape[-1]
    q = int(np.prod(shape[:-1])) if len(shape) > 1 else 1
    if isinstance(prior, K2Prior):
        return np.ones(shape)
    if isinstance(prior, BDeuPrior):
        return np.full(shape, prior.ess / (r * q))
    if isinstance(prior, DirichletPrior):
        if node not in prior.pseudo_counts:
            raise InvalidPrior(f"no pseudo-counts given for {node!r}")
        arr = prior.pseudo_counts[node]
        if arr.size != int(np.prod(shape)):
            raise InvalidPrior(
                f"pseudo-counts for {node!r} have {arr.size} entries, expected shape {tuple(shape)}"
            )
        return arr.reshape(shape)
    raise InvalidPrior(f"unsupported prior {prior!r}")


def bayes_fit(dag: Dag, data: DataTable, prior="k2", ess=None) -> DiscreteBayesianNetwork:
    """Posterior-mean CPDs: (counts + pseudo-counts), row-normalized.

    Parameters
    ----------
    prior : {"k2", "bdeu"}, K2Prior, BDeuPrior, DirichletPrior or dict
        A dict is read as Dirichlet pseudo-counts per node, each shaped
        ``parent_cards + (card,)`` with parents in sorted order.
    ess : float, optional
        Equivalent sample size when ``prior="bdeu"``.
    """
    prior = get_prior(prior, ess)
    _check_complete(dag, data)
    cpds = []
    for n in dag.sorted_nodes():
        counts = family_counts(dag, data, n)
        counts = counts + pseudo_counts(prior, n, counts.shape)
        cpds.append(cpd_from_counts(n, dag.parents(n), counts))
    return _network(dag, data, cpds)
