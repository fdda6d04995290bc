"""Variable elimination and greedy elimination-order heuristics."""

from __future__ import annotations

from itertools import combinations
from typing import Callable, Iterable, Sequence, Union

from bnkit.core.factor import DiscreteFactor, factor_marginalize, factor_normalize, factor_reduce, product_of
from bnkit.core.graph import moralize
from bnkit.exceptions import ImpossibleEvidence, InvalidFixedOrder, UnknownVariable, ZeroMass
from bnkit.infer.evidence import Evidence

MIN_FILL = "MinFill"
MIN_NEIGHBOURS = "MinNeighbours"
MIN_WEIGHT = "MinWeight"
WEIGHTED_MIN_FILL = "WeightedMinFill"
HEURISTICS = (MIN_FILL, MIN_NEIGHBOURS, MIN_WEIGHT, WEIGHTED_MIN_FILL)

_ALIASES = {
    "minfill": MIN_FILL,
    "min_fill": MIN_FILL,
    "minneighbours": MIN_NEIGHBOURS,
    "minneighbors": MIN_NEIGHBOURS,
    "min_neighbours": MIN_NEIGHBOURS,
    "min_neighbors": MIN_NEIGHBOURS,
    "minweight": MIN_WEIGHT,
    "min_weight": MIN_WEIGHT,
    "weightedminfill": WEIGHTED_MIN_FILL,
    "weighted_min_fill": WEIGHTED_MIN_FILL,
}

Heuristic = Union[str, Sequence[str], Callable]


def _fill_pairs(adj, node):
    return [(a, b) for a, b in combinations(sorted(adj[node]), 2) if b not in adj[a]]


def _cost_min_fill(adj, node, cards):
    return len(_fill_pairs(adj, node))


def _cost_min_neighbours(adj, node, cards):
    return len(adj[node])


def _cost_min_weight(adj, node, cards):
    w = 1
    for m in adj[node]:
        w *= cards[m]
    return w


def _cost_weighted_min_fill(adj, node, cards):
    return sum(cards[a] * cards[b] for a, b in _fill_pairs(adj, node))


_COSTS = {
    MIN_FILL: _cost_min_fill,
    MIN_NEIGHBOURS: _cost_min_neighbours,
    MIN_WEIGHT: _cost_min_weight,
    WEIGHTED_MIN_FILL: _cost_weighted_min_fill,
}


def heuristic_cost(heuristic) -> Callable:
    """Cost function ``(adjacency, node, cards) -> number`` for a heuristic name."""
    if callable(heuristic):
        return heuristic
    name = _ALIASES.get(str(heuristic).lower().replace("-", "_"), heuristic)
    try:
        return _COSTS[name]
    except KeyError:
        raise ValueError(f"unknown elimination heuristic {heuristic!r}; choose from {HEURISTICS}") from None


def greedy_order(adj: dict, cards: dict, to_eliminate: Iterable[str], heuristic=MIN_FILL) -> list:
    """Greedy order on an undirected graph; ties broken by name.

    ``adj`` is not modified. After each pick the node's neighbours are
    connected and the node removed.
    """
    cost = heuristic_cost(heuristic)
    adj = {n: set(nb) for n, nb in adj.items()}
    remaining = set(to_eliminate)
    order = []
    while remaining:
        node = min(sorted(remaining), key=lambda n: cost(adj, n, cards))
        order.append(node)
        remaining.discard(node)
        _eliminate(adj, node)
    return order


def _eliminate(adj, node):
    nbrs = adj.pop(node)
    for a in nbrs:
        adj[a].discard(node)
        adj[a].update(nbrs - {a})


def _moral_without(bn, removed):
    adj = moralize(bn.dag)
    for r in removed:
        _eliminate_edges_of(adj, r)
    return adj


def _eliminate_edges_of(adj, node):
    for a in adj.pop(node, ()):
        adj[a].discard(node)


def elimination_order(bn, to_eliminate, heuristic: Heuristic = MIN_FILL, evidence=None) -> list:
    """Order in which to sum out ``to_eliminate``.

    The greedy heuristics run on the moral graph with hard-evidence
    variables removed. A list (or tuple) is taken as a fixed order and must
    be a permutation of ``to_eliminate``.
    """
    to_eliminate = set(to_eliminate)
    unknown = to_eliminate - set(bn.nodes)
    if unknown:
        raise UnknownVariable(f"unknown variables {sorted(unknown)}")
    if isinstance(heuristic, (list, tuple)):
        if len(heuristic) != len(to_eliminate) or set(heuristic) != to_eliminate:
            raise InvalidFixedOrder(
                f"fixed order {list(heuristic)} is not a permutation of {sorted(to_eliminate)}"
            )
        return list(heuristic)
    ev = Evidence.coerce(evidence)
    adj = _moral_without(bn, set(ev.hard) - to_eliminate)
    return greedy_order(adj, bn.cards, to_eliminate, heuristic)


def induced_width(adj: dict, order: Sequence[str]) -> int:
    """Largest neighbourhood size met while eliminating ``order`` from ``adj``."""
    adj = {n: set(nb) for n, nb in adj.items()}
    width = 0
    for node in order:
        width = max(width, len(adj[node]))
        _eliminate(adj, node)
    return width


def relevant_nodes(bn, targets) -> set:
    """``targets`` plus their ancestors; everything else is barren."""
    targets = set(targets)
    return targets | bn.dag.ancestors(targets)


def eliminate(factors, order) -> list:
    """Sum out each variable of ``order`` in turn (bucket elimination)."""
    factors = list(factors)
    for var in order:
        bucket = [f for f in factors if var in f.scope]
        if not bucket:
            continue
        factors = [f for f in factors if var not in f.scope]
        factors.append(factor_marginalize(product_of(bucket), [var]))
    return factors


def ve_query(bn, variables, evidence=None, heuristic: Heuristic = MIN_FILL) -> DiscreteFactor:
    """Posterior ``P(variables | evidence)`` by variable elimination.

    Parameters
    ----------
    bn : DiscreteBayesianNetwork
    variables : str or iterable of str
    evidence : Evidence or dict, optional
        A plain dict is read as hard evidence.
    heuristic : str, list or callable
        Greedy heuristic name, fixed order, or cost function.

    Returns
    -------
    DiscreteFactor
        Normalized, scope sorted by variable name.
    """
    query = [variables] if isinstance(variables, str) else list(variables)
    if not query:
        raise ValueError("query needs at least one variable")
    for v in query:
        bn.card(v)
    ev = Evidence.coerce(evidence).resolve(bn)
    clash = set(query) & set(ev.hard)
    if clash:
        raise ValueError(f"query variables also carry hard evidence: {sorted(clash)}")

    keep = relevant_nodes(bn, set(query) | ev.variables())
    factors = []
    for n in sorted(keep):
        f = bn.cpds[n].factor
        hard = [(v, s) for v, s in ev.hard.items() if v in f.scope]
        factors.append(factor_reduce(f, hard))
    factors.extend(ev.virtual_factors())

    to_eliminate = keep - set(query) - set(ev.hard)
    if isinstance(heuristic, (list, tuple)):
        unknown = set(heuristic) - set(bn.nodes)
        if unknown:
            raise InvalidFixedOrder(f"fixed order names unknown variables {sorted(unknown)}")
        missing = to_eliminate - set(heuristic)
        if missing:
            raise InvalidFixedOrder(f"fixed order does not cover {sorted(missing)}")
        order = [v for v in heuristic if v in to_eliminate]
    else:
        adj = {n: nb & keep for n, nb in moralize(bn.dag).items() if n in keep}
        for h in ev.hard:
            _eliminate_edges_of(adj, h)
        order = greedy_order(adj, bn.cards, to_eliminate, heuristic)

    result = product_of(eliminate(factors, order))
    try:
        return factor_normalize(result).sorted()
    except ZeroMass:
        raise ImpossibleEvidence("evidence has zero probability under the model") from None
