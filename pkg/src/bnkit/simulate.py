"""Sampling from a fully specified network.

Random streams: rows are generated in blocks of ``BLOCK_SIZE``; block ``b``
draws the uniforms for the variable at topological position ``i`` from
``PCG64(SeedSequence(seed, spawn_key=(b, i)))``. Output for a given seed is
therefore independent of how blocks are scheduled.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from bnkit.core.data import DataTable
from bnkit.core.factor import DiscreteFactor
from bnkit.core.network import DiscreteBayesianNetwork, TabularCpd
from bnkit.exceptions import (
    CardinalityMismatch,
    ImpossibleEvidence,
    IncompatibleSpec,
    UnknownVariable,
)
from bnkit.infer.evidence import Evidence

BLOCK_SIZE = 4096


@dataclass
class SimulationSpec:
    """What to sample and under which conditions.

    ``hard_evidence`` and ``hard_intervention`` map variables to states,
    ``virtual_evidence`` maps variables to likelihood vectors and
    ``virtual_intervention`` maps variables to replacement CPDs over the
    same parents. A variable may appear in at most one of the four.
    """

    n: int
    seed: int | None = None
    hard_evidence: dict = field(default_factory=dict)
    virtual_evidence: dict = field(default_factory=dict)
    hard_intervention: dict = field(default_factory=dict)
    virtual_intervention: dict = field(default_factory=dict)
    method: str = "weighting"

    def __post_init__(self):
        if int(self.n) < 1:
            raise IncompatibleSpec(f"n must be at least 1, got {self.n}")
        if self.method not in ("weighting", "rejection"):
            raise IncompatibleSpec(f"unknown evidence method {self.method!r}")
        roles = [
            self.hard_evidence,
            self.virtual_evidence,
            self.hard_intervention,
            self.virtual_intervention,
        ]
        seen = {}
        for role in roles:
            for v in role:
                seen[v] = seen.get(v, 0) + 1
        dup = sorted(v for v, k in seen.items() if k > 1)
        if dup:
            raise IncompatibleSpec(f"variables used in more than one role: {dup}")

    @property
    def has_evidence(self) -> bool:
        return bool(self.hard_evidence or self.virtual_evidence)


def intervene(bn: DiscreteBayesianNetwork, hard=None, virtual=None) -> DiscreteBayesianNetwork:
    """Mutilated network.

    ``hard`` maps variables to states: parents are cut and the CPD becomes a
    point mass. ``virtual`` maps variables to replacement CPDs, which must
    keep the variable's parent set and cardinalities.
    """
    new = []
    for var, state in (hard or {}).items():
        code = bn.state_index(var, state)
        values = np.zeros(bn.card(var))
        values[code] = 1.0
        new.append(TabularCpd(var, bn.card(var), values))
    for var, cpd in (virtual or {}).items():
        old = bn.cpd(var)
        if not isinstance(cpd, TabularCpd) or cpd.child != var:
            raise IncompatibleSpec(f"replacement for {var!r} must be a TabularCpd of {var!r}")
        if set(cpd.parents) != set(old.parents):
            raise IncompatibleSpec(
                f"replacement CPD for {var!r} has parents {list(cpd.parents)}, "
                f"expected {list(old.parents)}"
            )
        if cpd.child_card != old.child_card:
            raise CardinalityMismatch(f"replacement CPD for {var!r} has the wrong cardinality")
        cpd = cpd.reorder_parents(old.parents)
        if cpd.parent_cards != old.parent_cards:
            raise CardinalityMismatch(f"replacement CPD for {var!r} has wrong parent cardinalities")
        new.append(cpd)
    return bn.replace_cpds(new) if new else bn


def _stream(seed, block, position):
    return np.random.Generator(np.random.PCG64(np.random.SeedSequence(seed, spawn_key=(block, position))))


def _draw(table, parent_idx, u):
    cum = np.cumsum(table, axis=1)
    cum[:, -1] = np.inf
    rows = cum[parent_idx]
    return (u[:, None] >= rows).sum(axis=1)


def _parent_index(codes, cols, parents, cards):
    if not parents:
        return np.zeros(codes.shape[0], dtype=np.int64)
    sub = tuple(codes[:, cols[p]] for p in parents)
    return np.ravel_multi_index(sub, [cards[p] for p in parents])


def _sample(bn, n, seed, clamp=None, likelihoods=None):
    """Ancestral sampling with optional clamped variables.

    Returns ``(codes, weights)`` with columns in ``bn.nodes`` order. A
    clamped variable multiplies the row weight by its CPD entry; a variable
    with a likelihood multiplies it by the likelihood of the sampled state.
    """
    if seed is None:
        seed = int(np.random.SeedSequence().entropy % (2**63))
    clamp = clamp or {}
    likelihoods = likelihoods or {}
    nodes = bn.nodes
    cols = {v: j for j, v in enumerate(nodes)}
    cards = bn.cards
    order = bn.dag.topological_order()
    codes = np.empty((n, len(nodes)), dtype=np.int64)
    weights = np.ones(n)
    for b, start in enumerate(range(0, n, BLOCK_SIZE)):
        stop = min(start + BLOCK_SIZE, n)
        block = codes[start:stop]
        w = weights[start:stop]
        for pos, var in enumerate(order):
            cpd = bn.cpds[var]
            table = cpd.table()
            pidx = _parent_index(block, cols, cpd.parents, cards)
            if var in clamp:
                block[:, cols[var]] = clamp[var]
                w *= table[pidx, clamp[var]]
            else:
                u = _stream(seed, b, pos).random(stop - start)
                block[:, cols[var]] = _draw(table, pidx, u)
            if var in likelihoods:
                w *= likelihoods[var][block[:, cols[var]]]
    return codes, weights


def forward_sample(bn: DiscreteBayesianNetwork, n: int, seed=None) -> DataTable:
    """``n`` rows by ancestral sampling; latent columns are kept and flagged."""
    codes, _ = _sample(bn, int(n), seed)
    return DataTable([bn.metas[v] for v in bn.nodes], codes, latents=bn.latents)


def simulate(bn: DiscreteBayesianNetwork, spec: SimulationSpec) -> DataTable:
    """Sample under interventions and evidence; returns weighted rows.

    Interventions are applied to the model first. Hard evidence is handled
    by likelihood weighting (or by rejection when ``spec.method`` is
    ``"rejection"``, in which case fewer than ``n`` rows may come back).
    Virtual evidence multiplies each row's weight by the likelihood of its
    sampled state. Without evidence every weight is 1.
    """
    for role in (spec.hard_evidence, spec.virtual_evidence, spec.hard_intervention, spec.virtual_intervention):
        for v in role:
            if v not in bn.cpds:
                raise UnknownVariable(f"unknown variable {v!r}")
    model = intervene(bn, spec.hard_intervention, spec.virtual_intervention)
    ev = Evidence(spec.hard_evidence, spec.virtual_evidence).resolve(model)
    metas = [model.metas[v] for v in model.nodes]
    if spec.method == "rejection" and ev.hard:
        codes, weights = _sample(model, int(spec.n), spec.seed, likelihoods=ev.virtual)
        cols = {v: j for j, v in enumerate(model.nodes)}
        keep = np.ones(codes.shape[0], dtype=bool)
        for v, s in ev.hard.items():
            keep &= codes[:, cols[v]] == s
        return DataTable(metas, codes[keep], weights[keep], latents=model.latents)
    codes, weights = _sample(model, int(spec.n), spec.seed, clamp=ev.hard, likelihoods=ev.virtual)
    return DataTable(metas, codes, weights, latents=model.latents)


def effective_sample_size(weights) -> float:
    w = np.asarray(weights, dtype=float)
    s2 = float(np.sum(w * w))
    return float(np.sum(w)) ** 2 / s2 if s2 > 0 else 0.0


def approx_query(bn: DiscreteBayesianNetwork, variables, evidence=None, n: int = 10_000, seed=None):
    """Approximate ``P(variables | evidence)`` by likelihood weighting.

    Returns
    -------
    factor : DiscreteFactor
        Normalized weighted frequencies, scope sorted by name.
    ess : float
        Effective sample size ``(sum w)^2 / sum w^2``.
    """
    query = [variables] if isinstance(variables, str) else list(variables)
    if not query:
        raise ValueError("query needs at least one variable")
    ev = Evidence.coerce(evidence)
    clash = set(query) & set(ev.hard)
    if clash:
        raise ValueError(f"query variables also carry hard evidence: {sorted(clash)}")
    spec = SimulationSpec(n=n, seed=seed, hard_evidence=ev.hard, virtual_evidence=ev.virtual)
    data = simulate(bn, spec)
    query = sorted(query)
    counts = data.counts(query)
    total = counts.sum()
    if not total > 0:
        raise ImpossibleEvidence("every sample has zero weight; evidence is impossible or too unlikely")
    factor = DiscreteFactor(query, [bn.card(v) for v in query], counts / total)
    return factor, effective_sample_size(data.weights)
