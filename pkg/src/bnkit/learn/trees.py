"""Tree-structured learners: Chow-Liu and Tree Augmented Naive Bayes."""

from __future__ import annotations

import math
from collections import deque
from itertools import combinations
from typing import Callable

import numpy as np

from bnkit.core.graph import Dag
from bnkit.exceptions import DisconnectedWeights, UnknownVariable


def _mi_from_counts(counts) -> float:
    """Mutual information (nats) of the first two axes, averaged over the rest."""
    counts = np.asarray(counts, dtype=float)
    rx, ry = counts.shape[:2]
    counts = counts.reshape(rx, ry, -1)
    n = counts.sum()
    if not n > 0:
        return 0.0
    pxyz = counts / n
    pz = pxyz.sum(axis=(0, 1), keepdims=True)
    pxz = pxyz.sum(axis=1, keepdims=True)
    pyz = pxyz.sum(axis=0, keepdims=True)
    denom = pxz * pyz
    nz = pxyz > 0
    ratio = np.divide(pxyz * pz, denom, out=np.ones_like(pxyz), where=nz)
    return float(max(np.sum(pxyz[nz] * np.log(ratio[nz])), 0.0))


def mutual_information(data, x, y) -> float:
    return _mi_from_counts(data.counts([x, y]))


def conditional_mutual_information(data, x, y, z) -> float:
    z = [z] if isinstance(z, str) else list(z)
    return _mi_from_counts(data.counts([x, y] + z))


def _entropy(p):
    p = p[p > 0]
    return float(-np.sum(p * np.log(p)))


def normalized_mutual_information(data, x, y) -> float:
    """MI divided by the geometric mean of the marginal entropies."""
    counts = data.counts([x, y])
    n = counts.sum()
    if not n > 0:
        return 0.0
    hx = _entropy(counts.sum(axis=1) / n)
    hy = _entropy(counts.sum(axis=0) / n)
    if hx == 0 or hy == 0:
        return 0.0
    return _mi_from_counts(counts) / math.sqrt(hx * hy)


def adjusted_mutual_information(data, x, y) -> float:
    """Chance-adjusted MI over complete rows. Row weights are ignored."""
    from sklearn.metrics import adjusted_mutual_info_score

    a, b = data.column(x), data.column(y)
    ok = (a >= 0) & (b >= 0)
    return float(adjusted_mutual_info_score(a[ok], b[ok]))


def normalized_conditional_mutual_information(data, x, y, z) -> float:
    """Conditional MI divided by the geometric mean of conditional entropies."""
    counts = data.counts([x, y, z])
    n = counts.sum()
    if not n > 0:
        return 0.0
    pz = counts.sum(axis=(0, 1)) / n
    pxz = counts.sum(axis=1) / n
    pyz = counts.sum(axis=0) / n
    hx = _entropy(pxz.ravel()) - _entropy(pz)
    hy = _entropy(pyz.ravel()) - _entropy(pz)
    if hx <= 0 or hy <= 0:
        return 0.0
    return _mi_from_counts(counts) / math.sqrt(hx * hy)


_EDGE_WEIGHTS = {
    "mutual_info": mutual_information,
    "normalized_mutual_info": normalized_mutual_information,
    "adjusted_mutual_info": adjusted_mutual_information,
}
_CLASS_WEIGHTS = {
    "mutual_info": conditional_mutual_information,
    "normalized_mutual_info": normalized_conditional_mutual_information,
}


def maximum_spanning_tree(nodes, weights: dict) -> list:
    """Kruskal on ``{(a, b): w}`` with ``a < b``; ties go to the smaller pair."""
    for pair, w in weights.items():
        if w is None or (isinstance(w, float) and math.isnan(w)):
            raise DisconnectedWeights(f"edge weight for {pair} is NaN")
    order = sorted(weights, key=lambda p: (-weights[p], p))
    root = {n: n for n in nodes}

    def find(a):
        while root[a] != a:
            root[a] = root[root[a]]
            a = root[a]
        return a

    tree = []
    for a, b in order:
        ra, rb = find(a), find(b)
        if ra != rb:
            root[rb] = ra
            tree.append((a, b))
    return tree


def orient_from_root(nodes, tree_edges, root) -> list:
    adj = {n: [] for n in nodes}
    for a, b in tree_edges:
        adj[a].append(b)
        adj[b].append(a)
    seen = {root}
    queue = deque([root])
    out = []
    while queue:
        u = queue.popleft()
        for v in sorted(adj[u]):
            if v not in seen:
                seen.add(v)
                out.append((u, v))
                queue.append(v)
    return out


def _resolve(weight, table, default):
    if weight is None:
        return default
    if isinstance(weight, str):
        try:
            return table[weight]
        except KeyError:
            raise ValueError(f"unknown edge weight {weight!r}; choose from {sorted(table)}") from None
    return weight


def tree_weights(data, variables, weight: Callable) -> dict:
    return {(a, b): float(weight(data, a, b)) for a, b in combinations(sorted(variables), 2)}


def chow_liu(data, weight=None, root=None, variables=None) -> Dag:
    """Maximum-weight spanning tree over the variables, directed away from ``root``.

    Parameters
    ----------
    data : DataTable
    weight : callable ``f(data, x, y) -> float`` or name, optional
        Defaults to empirical mutual information. Names:
        ``"mutual_info"``, ``"normalized_mutual_info"``, ``"adjusted_mutual_info"``.
    root : str, optional
        Defaults to the first variable by name.
    """
    variables = sorted(variables if variables is not None else data.columns)
    if len(variables) < 2:
        raise ValueError("Chow-Liu needs at least two variables")
    root = variables[0] if root is None else root
    if root not in variables:
        raise UnknownVariable(f"unknown root {root!r}")
    fn = _resolve(weight, _EDGE_WEIGHTS, mutual_information)
    tree = maximum_spanning_tree(variables, tree_weights(data, variables, fn))
    return Dag(orient_from_root(variables, tree, root), nodes=variables)


def tan(data, class_var, weight=None, root=None, variables=None) -> Dag:
    """Tree Augmented Naive Bayes structure.

    Features form a maximum spanning tree under class-conditional mutual
    information ``I(X; Y | class)``; the class is a parent of every feature.

    Parameters
    ----------
    weight : callable ``f(data, x, y, class_var) -> float`` or name, optional
    root : str, optional
        Root feature of the tree; defaults to the first feature by name.
    """
    variables = sorted(variables if variables is not None else data.columns)
    if class_var not in variables:
        raise UnknownVariable(f"unknown class variable {class_var!r}")
    features = [v for v in variables if v != class_var]
    if len(features) < 2:
        raise ValueError("TAN needs at least two feature variables")
    root = features[0] if root is None else root
    if root not in features:
        raise UnknownVariable(f"unknown root feature {root!r}")
    fn = _resolve(weight, _CLASS_WEIGHTS, conditional_mutual_information)
    weights = {(a, b): float(fn(data, a, b, class_var)) for a, b in combinations(features, 2)}
    tree = maximum_spanning_tree(features, weights)
    edges = orient_from_root(features, tree, root) + [(class_var, f) for f in features]
    return Dag(edges, nodes=variables)
