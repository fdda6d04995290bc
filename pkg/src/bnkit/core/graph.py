"""Directed and partially directed graphs over named variables."""

from __future__ import annotations

import heapq
from collections import deque
from itertools import combinations
from typing import Iterable

from bnkit.exceptions import CycleDetected, InvalidModel, NotExtendable, UnknownVariable


class Dag:
    """Immutable directed acyclic graph.

    Parameters
    ----------
    edges : iterable of (parent, child)
    nodes : iterable of str, optional
        Extra isolated nodes. Edge endpoints are always included.

    Examples
    --------
    >>> g = Dag([("A", "B"), ("B", "C")])
    >>> g.parents("C")
    ('B',)
    """

    __slots__ = ("_nodes", "_edges", "_parents", "_children", "_order")

    def __init__(self, edges: Iterable = (), nodes: Iterable = ()):
        edges = [tuple(e) for e in edges]
        node_set = set(nodes)
        for e in edges:
            if len(e) != 2:
                raise InvalidModel(f"edge must be a (parent, child) pair, got {e!r}")
            node_set.update(e)
        for n in node_set:
            if not isinstance(n, str) or not n:
                raise InvalidModel(f"node names must be nonempty strings, got {n!r}")
        edge_set = set(edges)
        if len(edge_set) != len(edges):
            raise InvalidModel("duplicate edges")
        parents = {n: set() for n in node_set}
        children = {n: set() for n in node_set}
        for u, v in edge_set:
            if u == v:
                raise InvalidModel(f"self-loop on {u!r}")
            parents[v].add(u)
            children[u].add(v)
        self._nodes = frozenset(node_set)
        self._edges = frozenset(edge_set)
        self._parents = {n: tuple(sorted(p)) for n, p in parents.items()}
        self._children = {n: tuple(sorted(c)) for n, c in children.items()}
        self._order = _kahn(self._nodes, self._parents, self._children)

    @property
    def nodes(self) -> frozenset:
        return self._nodes

    @property
    def edges(self) -> frozenset:
        return self._edges

    def sorted_nodes(self):
        return sorted(self._nodes)

    def sorted_edges(self):
        return sorted(self._edges)

    def parents(self, node) -> tuple:
        self._check(node)
        return self._parents[node]

    def children(self, node) -> tuple:
        self._check(node)
        return self._children[node]

    def has_edge(self, u, v) -> bool:
        return (u, v) in self._edges

    def adjacent(self, u, v) -> bool:
        return (u, v) in self._edges or (v, u) in self._edges

    def neighbors(self, node) -> set:
        return set(self.parents(node)) | set(self.children(node))

    def ancestors(self, nodes) -> set:
        """Strict ancestors of ``nodes`` (a node or an iterable of nodes)."""
        return self._reach(_as_set(nodes), self._parents)

    def descendants(self, nodes) -> set:
        """Strict descendants of ``nodes``."""
        return self._reach(_as_set(nodes), self._children)

    def _reach(self, start, nbrs):
        for n in start:
            self._check(n)
        seen = set()
        stack = list(start)
        while stack:
            for m in nbrs[stack.pop()]:
                if m not in seen:
                    seen.add(m)
                    stack.append(m)
        return seen

    def topological_order(self) -> list:
        return list(self._order)

    def skeleton(self) -> frozenset:
        return frozenset(frozenset(e) for e in self._edges)

    def v_structures(self) -> frozenset:
        """Unshielded colliders as ``(a, c, b)`` with ``a < b``."""
        out = set()
        for c in self._nodes:
            for a, b in combinations(self._parents[c], 2):
                if not self.adjacent(a, b):
                    out.add((a, c, b))
        return frozenset(out)

    def subgraph_without_edges(self, drop) -> "Dag":
        drop = set(drop)
        return Dag([e for e in self._edges if e not in drop], nodes=self._nodes)

    def _check(self, node):
        if node not in self._nodes:
            raise UnknownVariable(f"unknown variable {node!r}")

    def __eq__(self, other):
        return isinstance(other, Dag) and self._nodes == other._nodes and self._edges == other._edges

    def __hash__(self):
        return hash((self._nodes, self._edges))

    def __repr__(self):
        return f"Dag(edges={self.sorted_edges()!r}, nodes={self.sorted_nodes()!r})"

    def __len__(self):
        return len(self._nodes)


def _as_set(nodes):
    if isinstance(nodes, str):
        return {nodes}
    return set(nodes)


def _kahn(nodes, parents, children):
    indeg = {n: len(parents[n]) for n in nodes}
    heap = [n for n in nodes if indeg[n] == 0]
    heapq.heapify(heap)
    order = []
    while heap:
        n = heapq.heappop(heap)
        order.append(n)
        for c in children[n]:
            indeg[c] -= 1
            if indeg[c] == 0:
                heapq.heappush(heap, c)
    if len(order) != len(nodes):
        stuck = sorted(n for n in nodes if indeg[n] > 0)
        raise CycleDetected(f"graph contains a directed cycle through {stuck}", stuck)
    return tuple(order)


def topological_order(dag: Dag) -> list:
    """Parents before children; ties broken by variable name."""
    return dag.topological_order()


class Pdag:
    """Partially directed graph: directed edges plus undirected edges.

    Undirected edges are stored as frozensets ``{u, v}``.
    """

    __slots__ = ("_nodes", "_directed", "_undirected")

    def __init__(self, directed: Iterable = (), undirected: Iterable = (), nodes: Iterable = ()):
        directed = {tuple(e) for e in directed}
        undirected = {frozenset(e) for e in undirected}
        node_set = set(nodes)
        for u, v in directed:
            node_set.update((u, v))
            if u == v:
                raise InvalidModel(f"self-loop on {u!r}")
        for e in undirected:
            if len(e) != 2:
                raise InvalidModel(f"invalid undirected edge {sorted(e)!r}")
            node_set.update(e)
        pairs = set()
        for u, v in directed:
            key = frozenset((u, v))
            if key in pairs:
                raise InvalidModel(f"more than one edge between {u!r} and {v!r}")
            pairs.add(key)
        for e in undirected:
            if e in pairs:
                raise InvalidModel(f"more than one edge between {sorted(e)!r}")
        self._nodes = frozenset(node_set)
        self._directed = frozenset(directed)
        self._undirected = frozenset(undirected)

    @property
    def nodes(self):
        return self._nodes

    @property
    def directed(self):
        return self._directed

    @property
    def undirected(self):
        return self._undirected

    def sorted_undirected(self):
        return sorted(tuple(sorted(e)) for e in self._undirected)

    def skeleton(self):
        return frozenset(frozenset(e) for e in self._directed) | self._undirected

    def __eq__(self, other):
        return (
            isinstance(other, Pdag)
            and self._nodes == other._nodes
            and self._directed == other._directed
            and self._undirected == other._undirected
        )

    def __hash__(self):
        return hash((self._nodes, self._directed, self._undirected))

    def __repr__(self):
        return (
            f"Pdag(directed={sorted(self._directed)!r}, "
            f"undirected={self.sorted_undirected()!r}, nodes={sorted(self._nodes)!r})"
        )

    @classmethod
    def from_dag(cls, dag: Dag):
        return cls(directed=dag.edges, nodes=dag.nodes)


def d_separated(dag: Dag, x, y, z=()) -> bool:
    """True iff every path between ``x`` and ``y`` is blocked given ``z``.

    Reachability ("Bayes ball") over (node, direction) states, linear in
    the number of edges.
    """
    x, y, z = _as_set(x), _as_set(y), _as_set(z)
    for n in x | y | z:
        dag._check(n)
    if x & y:
        raise ValueError("x and y must be disjoint")
    if (x | y) & z:
        raise ValueError("z must be disjoint from x and y")

    # Ancestors of z (inclusive) decide whether a collider is open.
    anc_z = set(z) | dag.ancestors(z)
    # "up" = arrived from a child, "down" = arrived from a parent.
    visited = set()
    queue = deque((n, "up") for n in x)
    while queue:
        node, direction = queue.popleft()
        if (node, direction) in visited:
            continue
        visited.add((node, direction))
        if node in y:
            return False
        if direction == "up":
            if node not in z:
                for p in dag.parents(node):
                    queue.append((p, "up"))
                for c in dag.children(node):
                    queue.append((c, "down"))
        else:
            if node not in z:
                for c in dag.children(node):
                    queue.append((c, "down"))
            if node in anc_z:
                for p in dag.parents(node):
                    queue.append((p, "up"))
    return True


def moralize(dag: Dag) -> dict:
    """Moral graph as an adjacency mapping ``node -> set(neighbors)``."""
    adj = {n: set() for n in dag.nodes}
    for u, v in dag.edges:
        adj[u].add(v)
        adj[v].add(u)
    for n in dag.nodes:
        for a, b in combinations(dag.parents(n), 2):
            adj[a].add(b)
            adj[b].add(a)
    return adj


def undirected_edges(adj: dict) -> set:
    return {frozenset((u, v)) for u, nb in adj.items() for v in nb}


def pdag_to_dag(pdag: Pdag) -> Dag:
    """Orient the undirected edges of ``pdag`` without new v-structures.

    Dor-Tarsi elimination: repeatedly remove a sink whose undirected
    neighbours are adjacent to all its other neighbours. Among eligible
    sinks the lexicographically largest is taken, so an isolated ``A - B``
    becomes ``A -> B``.
    """
    nodes = set(pdag.nodes)
    directed = set(pdag.directed)
    undirected = {frozenset(e) for e in pdag.undirected}
    result = set(directed)

    def adjacent(a, b):
        return (
            (a, b) in directed
            or (b, a) in directed
            or frozenset((a, b)) in undirected
        )

    while nodes:
        chosen = None
        for n in sorted(nodes, reverse=True):
            if any(u == n for u, _ in directed):
                continue
            und_nbrs = [next(iter(e - {n})) for e in undirected if n in e]
            all_nbrs = set(und_nbrs) | {u for u, v in directed if v == n}
            if all(
                adjacent(m, o) for m in und_nbrs for o in all_nbrs if o != m
            ):
                chosen = n
                break
        if chosen is None:
            raise NotExtendable("partially directed graph has no consistent extension")
        for e in [e for e in undirected if chosen in e]:
            (other,) = e - {chosen}
            result.add((other, chosen))
            undirected.discard(e)
        directed = {(u, v) for u, v in directed if v != chosen}
        nodes.discard(chosen)
    try:
        return Dag(result, nodes=pdag.nodes)
    except CycleDetected as exc:
        raise NotExtendable(str(exc)) from exc
