"""Expectation maximization for missing cells and latent variables."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bnkit.core.data import MISSING, DataTable
from bnkit.core.factor import factor_marginalize
from bnkit.core.graph import Dag
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd, VariableMeta
from bnkit.exceptions import InvalidModel, NoObservedData, UnknownVariable
from bnkit.fit.parameters import cpd_from_counts
from bnkit.infer.evidence import Evidence
from bnkit.infer.junction import build_junction_tree, calibrate


@dataclass(frozen=True)
class EmConfig:
    max_iter: int = 100
    tol: float = 1e-4
    seed: int = 0

    def __post_init__(self):
        if self.max_iter < 1:
            raise ValueError("max_iter must be at least 1")
        if not self.tol > 0:
            raise ValueError("tol must be positive")


@dataclass
class EmResult:
    """Fitted network plus the observed-data log-likelihood trace.

    ``log_likelihoods[k]`` is evaluated at the parameters after ``k``
    M-steps (entry 0 is the initialization). ``model`` is the last
    parameterization evaluated.
    """

    model: DiscreteBayesianNetwork
    log_likelihoods: list = field(default_factory=list)
    converged: bool = False

    @property
    def n_iter(self) -> int:
        return len(self.log_likelihoods) - 1


def random_init(dag, metas, seed, noise=0.01) -> DiscreteBayesianNetwork:
    """Uniform CPDs plus seeded uniform noise of the given magnitude."""
    rng = np.random.default_rng(seed)
    cpds = []
    for n in dag.sorted_nodes():
        parents = dag.parents(n)
        r = metas[n].card
        q = int(np.prod([metas[p].card for p in parents])) if parents else 1
        table = np.full((q, r), 1.0 / r) + rng.uniform(-noise, noise, size=(q, r))
        table = np.clip(table, 1e-6, None)
        table /= table.sum(axis=1, keepdims=True)
        cpds.append(TabularCpd(n, r, table, parents, [metas[p].card for p in parents]))
    return DiscreteBayesianNetwork(cpds, metas=metas)


class _Patterns:
    """Distinct rows (after projecting on the model's variables) and their weights."""

    def __init__(self, nodes, data, latents):
        n = data.n_rows
        codes = np.full((n, len(nodes)), MISSING, dtype=np.int64)
        for j, v in enumerate(nodes):
            if v not in latents:
                codes[:, j] = data.column(v)
        w = data.row_weights()
        keep = w > 0
        codes, w = codes[keep], w[keep]
        if codes.shape[0] == 0 or np.all(codes == MISSING):
            raise NoObservedData("no observed cells to fit")
        self.rows, inverse = np.unique(codes, axis=0, return_inverse=True)
        self.weights = np.bincount(inverse.reshape(-1), weights=w, minlength=self.rows.shape[0])
        complete = np.all(self.rows != MISSING, axis=1)
        self.complete = np.flatnonzero(complete)
        self.partial = np.flatnonzero(~complete)


def _expected_counts(bn, patterns, nodes):
    """E-step. Returns (observed-data log-likelihood, {node: expected counts})."""
    col = {v: j for j, v in enumerate(nodes)}
    counts = {n: np.zeros(bn.cpds[n].factor.cards) for n in nodes}
    ll = 0.0

    rows = patterns.rows[patterns.complete]
    w = patterns.weights[patterns.complete]
    if rows.shape[0]:
        logp = np.zeros(rows.shape[0])
        for n in nodes:
            cpd = bn.cpds[n]
            idx = tuple(rows[:, col[v]] for v in cpd.factor.scope)
            np.add.at(counts[n], idx, w)
            with np.errstate(divide="ignore"):
                logp += np.log(cpd.factor.values[idx])
        ll += float(np.dot(w, logp))

    if patterns.partial.size:
        jt = build_junction_tree(bn)
        for k in patterns.partial:
            row = patterns.rows[k]
            weight = patterns.weights[k]
            hard = {v: int(row[col[v]]) for v in nodes if row[col[v]] != MISSING}
            cal = calibrate(jt, Evidence(hard))
            ll += weight * cal.log_evidence
            for n in nodes:
                belief = cal.beliefs[jt.assignment[n]]
                scope = bn.cpds[n].factor.scope
                fam = factor_marginalize(belief, set(belief.scope) - set(scope)).transpose(scope)
                counts[n] += weight * fam.values
    return ll, counts


def em_fit(
    dag: Dag,
    data: DataTable,
    latents=(),
    config: EmConfig = EmConfig(),
    latent_states=None,
    init: DiscreteBayesianNetwork | None = None,
) -> EmResult:
    """Maximum-likelihood CPDs with missing cells and/or latent variables.

    Parameters
    ----------
    dag : Dag
    data : DataTable
        May contain missing cells. Latent columns may be absent or fully
        missing.
    latents : iterable of str
        Nodes never observed.
    config : EmConfig
    latent_states : dict, optional
        ``{latent: card or state labels}`` for latents absent from ``data``
        (default two states).
    init : DiscreteBayesianNetwork, optional
        Starting parameters; defaults to seeded noisy-uniform CPDs.

    Returns
    -------
    EmResult
        Iteration stops once the observed-data log-likelihood improves by
        less than ``config.tol`` or after ``config.max_iter`` M-steps; in the
        latter case ``converged`` is False.
    """
    latents = frozenset(latents) | (data.latents & dag.nodes)
    unknown = latents - dag.nodes
    if unknown:
        raise UnknownVariable(f"latent variables not in the DAG: {sorted(unknown)}")
    latent_states = dict(latent_states or {})
    metas = {}
    for n in dag.sorted_nodes():
        if n in data.columns:
            metas[n] = data.meta(n)
            if n in latents and not np.all(data.column(n) == MISSING) and data.n_rows:
                raise InvalidModel(f"latent column {n!r} contains observed values")
        elif n in latents:
            spec = latent_states.get(n, 2)
            metas[n] = (
                VariableMeta.default(n, spec) if isinstance(spec, int) else VariableMeta(n, tuple(spec))
            )
        else:
            raise UnknownVariable(f"{n!r} is neither a data column nor a declared latent")

    nodes = dag.sorted_nodes()
    patterns = _Patterns(nodes, data, latents)

    if init is None:
        bn = random_init(dag, metas, config.seed)
    else:
        if init.dag != dag:
            raise InvalidModel("initial network has a different graph")
        bn = DiscreteBayesianNetwork(init.cpds.values(), metas=metas)

    ll, counts = _expected_counts(bn, patterns, nodes)
    trace = [float(ll)]
    converged = False
    for _ in range(config.max_iter):
        bn = DiscreteBayesianNetwork(
            [cpd_from_counts(n, dag.parents(n), counts[n]) for n in nodes], metas=metas
        )
        new_ll, counts = _expected_counts(bn, patterns, nodes)
        trace.append(float(new_ll))
        if new_ll - ll < config.tol:
            converged = True
            break
        ll = new_ll
    model = DiscreteBayesianNetwork(bn.cpds.values(), metas=metas, latents=latents)
    return EmResult(model, trace, converged)
