"""Graphical causal identification and discrete effect estimation.

Latent confounders are ordinary DAG nodes flagged as latent; adjustment sets
and instrument conditioning sets only ever contain observable nodes.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field
from itertools import combinations

import numpy as np

from bnkit.core.factor import DiscreteFactor
from bnkit.core.graph import Dag, d_separated
from bnkit.exceptions import (
    ImpossibleEvidence,
    ImpossibleStratumWarning,
    NoDirectedEdge,
    UnknownVariable,
)
from bnkit.infer.elimination import ve_query

MAX_SETS = 100


@dataclass(frozen=True)
class CausalQuery:
    """Effect of ``exposure`` on ``outcome`` in ``dag``; ``latents`` are unobserved."""

    exposure: str
    outcome: str
    dag: Dag
    latents: frozenset = field(default_factory=frozenset)

    def __post_init__(self):
        object.__setattr__(self, "latents", frozenset(self.latents))
        for v in (self.exposure, self.outcome, *self.latents):
            if v not in self.dag.nodes:
                raise UnknownVariable(f"unknown variable {v!r}")
        if self.exposure == self.outcome:
            raise ValueError("exposure and outcome must differ")
        if {self.exposure, self.outcome} & self.latents:
            raise ValueError("exposure and outcome must be observed")

    @property
    def observed(self) -> frozenset:
        return self.dag.nodes - self.latents


@dataclass(frozen=True)
class IvResult:
    instrument: str
    conditioning_set: frozenset = frozenset()

    def to_dict(self):
        return {"instrument": self.instrument, "conditioning_set": sorted(self.conditioning_set)}


def _causal_nodes(dag: Dag, x, y) -> set:
    """Nodes other than ``x`` on some directed path from ``x`` to ``y``."""
    return (dag.descendants([x]) - {x}) & (dag.ancestors([y]) | {y})


def forbidden_nodes(dag: Dag, x, y) -> set:
    """``x`` plus every descendant of a node on a proper causal path."""
    cn = _causal_nodes(dag, x, y)
    return dag.descendants(cn) | cn | {x}


def proper_backdoor_graph(dag: Dag, x, y) -> Dag:
    """``dag`` without the first edge of every proper causal path from ``x`` to ``y``."""
    cn = _causal_nodes(dag, x, y)
    return dag.subgraph_without_edges([(x, w) for w in dag.children(x) if w in cn])


def is_valid_adjustment_set(q: CausalQuery, z) -> bool:
    """Adjustment criterion: no forbidden node in ``z`` and ``z`` separates
    exposure from outcome in the proper back-door graph."""
    z = set(z)
    x, y = q.exposure, q.outcome
    if not z <= q.observed or y in z:
        return False
    if z & forbidden_nodes(q.dag, x, y):
        return False
    return d_separated(proper_backdoor_graph(q.dag, x, y), {x}, {y}, z)


def minimal_adjustment_sets(q: CausalQuery, max_sets: int = MAX_SETS) -> list:
    """All inclusion-minimal valid adjustment sets, smallest first.

    Minimal sets only use observable ancestors of exposure or outcome, so the
    search runs over those. Sets of equal size come in lexicographic order.
    An empty list means no valid adjustment set exists.
    """
    x, y = q.exposure, q.outcome
    pool = q.dag.ancestors([x, y]) & q.observed
    pool -= forbidden_nodes(q.dag, x, y) | {x, y}
    pool = sorted(pool)
    # the largest candidate is valid whenever any set is
    if not is_valid_adjustment_set(q, pool):
        return []
    found = []
    for k in range(len(pool) + 1):
        for z in combinations(pool, k):
            zs = frozenset(z)
            if any(f <= zs for f in found):
                continue
            if is_valid_adjustment_set(q, zs):
                found.append(zs)
                if len(found) >= max_sets:
                    return found
    return found


def is_instrument(q: CausalQuery, z, w=()) -> bool:
    """The three conditional-instrument conditions for ``z`` given ``w``."""
    x, y = q.exposure, q.outcome
    w = set(w)
    if z in (x, y) or z in w or {x, y} & w:
        return False
    if not ({z} | w) <= q.observed:
        return False
    if w & q.dag.descendants([y]):
        return False
    if d_separated(q.dag, {z}, {x}, w):
        return False
    return d_separated(q.dag.subgraph_without_edges([(x, y)]), {z}, {y}, w)


def instrumental_variables(q: CausalQuery, max_conditioning=None) -> list:
    """Instruments for the edge exposure -> outcome.

    For every observable candidate the smallest conditioning set (first in
    lexicographic order within a size) is reported; plain instruments come
    back with an empty set.

    Raises
    ------
    NoDirectedEdge
        If the graph has no exposure -> outcome edge.
    """
    x, y = q.exposure, q.outcome
    if not q.dag.has_edge(x, y):
        raise NoDirectedEdge(f"graph has no edge {x} -> {y}")
    banned = q.dag.descendants([y]) | {x, y}
    out = []
    for z in sorted(q.observed - {x, y}):
        pool = sorted(q.observed - banned - {z})
        top = len(pool) if max_conditioning is None else min(len(pool), max_conditioning)
        hit = next(
            (w for k in range(top + 1) for w in combinations(pool, k) if is_instrument(q, z, w)),
            None,
        )
        if hit is not None:
            out.append(IvResult(z, frozenset(hit)))
    return out


def causal_effect_discrete(bn, exposure, outcome, adjustment=()) -> dict:
    """``P(outcome | do(exposure = x))`` for every exposure state, by adjustment.

    Computes ``sum_z P(outcome | x, z) P(z)`` from one exact joint query over
    exposure, outcome and the adjustment set. Strata with ``P(x, z) = 0`` are
    skipped with an :class:`ImpossibleStratumWarning`.

    Returns
    -------
    dict
        Exposure state label -> normalized DiscreteFactor over ``outcome``.
    """
    adjustment = sorted(set(adjustment))
    for v in [exposure, outcome, *adjustment]:
        if v not in bn.nodes:
            raise UnknownVariable(f"unknown variable {v!r}")
    if exposure == outcome or {exposure, outcome} & set(adjustment):
        raise ValueError("exposure, outcome and adjustment set must be disjoint")
    joint = ve_query(bn, [exposure, outcome, *adjustment]).transpose([exposure, outcome, *adjustment])
    p = joint.values.reshape(bn.card(exposure), bn.card(outcome), -1)
    p_z = p.sum(axis=(0, 1))
    p_xz = p.sum(axis=1)
    out = {}
    for i, label in enumerate(bn.states(exposure)):
        acc = np.zeros(bn.card(outcome))
        for k in np.flatnonzero(p_z > 0):
            if p_xz[i, k] <= 0:
                warnings.warn(
                    f"stratum {k} of {adjustment} has P({exposure}={label}, z) = 0; skipped",
                    ImpossibleStratumWarning,
                    stacklevel=2,
                )
                continue
            acc += p[i, :, k] / p_xz[i, k] * p_z[k]
        if not acc.sum() > 0:
            raise ImpossibleEvidence(f"no stratum supports {exposure}={label}")
        out[label] = DiscreteFactor([outcome], [bn.card(outcome)], acc / acc.sum())
    return out
