"""Junction-tree belief propagation (sum-product, two-pass schedule)."""

from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field, replace
from itertools import combinations

import numpy as np

from bnkit.core.factor import (
    DiscreteFactor,
    factor_marginalize,
    factor_normalize,
    factor_product,
    product_of,
)
from bnkit.core.graph import moralize
from bnkit.exceptions import ImpossibleEvidence, NotCalibrated, UnknownVariable, ZeroMass
from bnkit.infer.elimination import MIN_FILL, _eliminate, eliminate, greedy_order
from bnkit.infer.evidence import Evidence


@dataclass(frozen=True, eq=False)
class JunctionTree:
    """Clique tree with potentials.

    ``cliques[i]`` is a sorted tuple of variable names, ``edges`` a list of
    clique index pairs. Before calibration ``beliefs`` is ``None``; after,
    it holds the normalized posterior over each clique, and
    ``log_evidence`` is ``ln P(evidence)``.
    """

    cliques: tuple
    edges: tuple
    potentials: tuple
    cards: dict
    assignment: dict
    calibrated: bool = False
    beliefs: tuple = None
    log_evidence: float = None
    evidence: Evidence = field(default_factory=Evidence)

    def separator(self, i, j) -> tuple:
        return tuple(sorted(set(self.cliques[i]) & set(self.cliques[j])))

    def neighbors(self, i) -> list:
        return sorted([b for a, b in self.edges if a == i] + [a for a, b in self.edges if b == i])

    def clique_containing(self, variables):
        variables = set(variables)
        best = None
        for i, c in enumerate(self.cliques):
            if variables <= set(c) and (best is None or len(c) < len(self.cliques[best])):
                best = i
        return best


def _max_spanning_tree(n, weight):
    pairs = sorted(combinations(range(n), 2), key=lambda p: (-weight(*p), p))
    root = list(range(n))

    def find(a):
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    edges = []
    for i, j in pairs:
        ri, rj = find(i), find(j)
        if ri != rj:
            root[rj] = ri
            edges.append((i, j))
    return edges


def build_junction_tree(bn) -> JunctionTree:
    """Moralize, triangulate with MinFill, keep maximal cliques, join them by
    a maximum-weight spanning tree on separator sizes."""
    adj = moralize(bn.dag)
    order = greedy_order(adj, bn.cards, bn.nodes, MIN_FILL)
    work = {n: set(nb) for n, nb in adj.items()}
    found = []
    for node in order:
        found.append(frozenset(work[node] | {node}))
        _eliminate(work, node)
    cliques = []
    for c in found:
        if not any(c < d for d in found) and c not in cliques:
            cliques.append(c)
    cliques = [tuple(sorted(c)) for c in cliques]
    sets = [set(c) for c in cliques]
    edges = _max_spanning_tree(len(cliques), lambda i, j: len(sets[i] & sets[j]))

    cards = bn.cards
    assignment = {}
    grouped = [[] for _ in cliques]
    for n in bn.nodes:
        family = set(bn.cpds[n].factor.scope)
        i = next(k for k, s in enumerate(sets) if family <= s)
        assignment[n] = i
        grouped[i].append(bn.cpds[n].factor)
    potentials = []
    for c, fs in zip(cliques, grouped):
        ones = DiscreteFactor._trusted(c, [cards[v] for v in c], np.ones([cards[v] for v in c]))
        potentials.append(product_of([ones] + fs).transpose(c))
    return JunctionTree(tuple(cliques), tuple(edges), tuple(potentials), dict(cards), assignment)


def _rooted(jt):
    parent = {0: None}
    order = [0]
    queue = deque([0])
    while queue:
        i = queue.popleft()
        for j in jt.neighbors(i):
            if j not in parent:
                parent[j] = i
                order.append(j)
                queue.append(j)
    return parent, order


def _message(factor, target_scope):
    drop = [v for v in factor.scope if v not in target_scope]
    msg = factor_marginalize(factor, drop)
    total = msg.total()
    if not total > 0:
        raise ImpossibleEvidence("evidence has zero probability under the model")
    return factor_normalize(msg), math.log(total)


def calibrate(jt: JunctionTree, evidence=None, bn=None) -> JunctionTree:
    """Collect to clique 0, then distribute. Returns a new calibrated tree.

    Hard evidence enters as one-hot indicator factors and virtual evidence
    as likelihood factors, each multiplied into the smallest clique holding
    the variable. ``bn`` is only needed to translate state labels.
    """
    ev = Evidence.coerce(evidence)
    if bn is not None:
        ev = ev.resolve(bn)
    for v in ev.variables():
        if v not in jt.cards:
            raise UnknownVariable(f"unknown variable {v!r}")
    for v, s in ev.hard.items():
        if not isinstance(s, (int, np.integer)):
            raise ValueError(f"hard evidence on {v!r} must be a state code (pass bn= to use labels)")
    pots = list(jt.potentials)
    for f in ev.indicator_factors(jt.cards) + ev.virtual_factors():
        i = jt.clique_containing(f.scope)
        pots[i] = factor_product(pots[i], f).transpose(jt.cliques[i])

    parent, order = _rooted(jt)
    children = {i: [] for i in order}
    for i in order[1:]:
        children[parent[i]].append(i)

    up = {}
    log_z = 0.0
    for i in reversed(order[1:]):
        f = product_of([pots[i]] + [up[c] for c in children[i]])
        up[i], lz = _message(f, jt.cliques[parent[i]])
        log_z += lz

    down = {}
    beliefs = [None] * len(pots)
    for i in order:
        incoming = [up[c] for c in children[i]]
        if parent[i] is not None:
            incoming.append(down[i])
        belief = product_of([pots[i]] + incoming)
        if i == 0:
            total = belief.total()
            if not total > 0:
                raise ImpossibleEvidence("evidence has zero probability under the model")
            log_z += math.log(total)
        for c in children[i]:
            rest = [up[d] for d in children[i] if d != c]
            if parent[i] is not None:
                rest.append(down[i])
            down[c], _ = _message(product_of([pots[i]] + rest), jt.cliques[c])
        try:
            beliefs[i] = factor_normalize(belief).transpose(jt.cliques[i])
        except ZeroMass:
            raise ImpossibleEvidence("evidence has zero probability under the model") from None
    return replace(
        jt, calibrated=True, beliefs=tuple(beliefs), log_evidence=log_z, evidence=ev
    )


def _tree_path(jt, a, b):
    parent, _ = _rooted(jt)

    def to_root(x):
        path = [x]
        while parent[path[-1]] is not None:
            path.append(parent[path[-1]])
        return path

    pa, pb = to_root(a), to_root(b)
    common = set(pa) & set(pb)
    return {x for x in pa if x not in common} | {x for x in pb if x not in common} | {
        next(x for x in pa if x in common)
    }


def bp_query(jt: JunctionTree, variables) -> DiscreteFactor:
    """Normalized posterior over ``variables`` from a calibrated tree.

    If no single clique holds every query variable, the subtree connecting
    the relevant cliques is contracted exactly (clique beliefs divided by
    separator marginals) and the extra variables summed out.
    """
    if not jt.calibrated:
        raise NotCalibrated("calibrate the junction tree before querying it")
    query = [variables] if isinstance(variables, str) else list(variables)
    if not query:
        raise ValueError("query needs at least one variable")
    for v in query:
        if v not in jt.cards:
            raise UnknownVariable(f"unknown variable {v!r}")
    i = jt.clique_containing(query)
    if i is not None:
        belief = jt.beliefs[i]
        return factor_normalize(factor_marginalize(belief, set(belief.scope) - set(query))).sorted()

    anchors = sorted({jt.clique_containing([v]) for v in query})
    nodes = {anchors[0]}
    for a in anchors[1:]:
        nodes |= _tree_path(jt, anchors[0], a)
    factors = [jt.beliefs[k] for k in sorted(nodes)]
    for a, b in jt.edges:
        if a in nodes and b in nodes:
            sep = jt.separator(a, b)
            mu = factor_marginalize(jt.beliefs[a], set(jt.cliques[a]) - set(sep))
            inv = np.divide(1.0, mu.values, out=np.zeros_like(mu.values), where=mu.values > 0)
            factors.append(DiscreteFactor._trusted(mu.scope, mu.cards, inv))
    adj = {}
    for f in factors:
        for v in f.scope:
            adj.setdefault(v, set()).update(set(f.scope) - {v})
    order = greedy_order(adj, jt.cards, set(adj) - set(query), MIN_FILL)
    return factor_normalize(product_of(eliminate(factors, order))).sorted()
