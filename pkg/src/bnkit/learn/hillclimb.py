"""Greedy hill climbing over DAGs with add/delete/reverse moves."""

from __future__ import annotations

from collections import deque
from itertools import permutations

import numpy as np

from bnkit.core.graph import Dag
from bnkit.exceptions import CycleDetected, InvalidConstraints, UnknownVariable
from bnkit.learn.scores import get_score

IMPROVEMENT_EPS = 1e-9
TIE_EPS = 1e-9


class ScoreCache:
    """Memoized local scores keyed by ``(child, frozenset(parents))``."""

    def __init__(self, data, score):
        self.data = data
        self.score = score
        self._cache = {}

    def __call__(self, child, parents):
        key = (child, frozenset(parents))
        if key not in self._cache:
            self._cache[key] = self.score(child, sorted(parents), self.data)
        return self._cache[key]

    def total(self, parents: dict) -> float:
        return sum(self(n, parents[n]) for n in sorted(parents))


def _reachable(children, src, dst, skip_edge=None):
    """Directed path src ~> dst, optionally ignoring one edge."""
    seen = {src}
    queue = deque([src])
    while queue:
        u = queue.popleft()
        for v in children[u]:
            if (u, v) == skip_edge:
                continue
            if v == dst:
                return True
            if v not in seen:
                seen.add(v)
                queue.append(v)
    return False


def legal_moves(parents, children, nodes, max_indegree, tabu, whitelist, blacklist):
    """Yield ``(op, (u, v))`` moves in a fixed order: adds, deletes, reverses."""
    for u, v in permutations(nodes, 2):
        if u in parents[v] or v in parents[u]:
            continue
        move = ("+", (u, v))
        if move in tabu or (u, v) in blacklist:
            continue
        if max_indegree is not None and len(parents[v]) >= max_indegree:
            continue
        if _reachable(children, v, u):
            continue
        yield move
    edges = sorted((p, c) for c in nodes for p in parents[c])
    for u, v in edges:
        move = ("-", (u, v))
        if move in tabu or (u, v) in whitelist:
            continue
        yield move
    for u, v in edges:
        move = ("flip", (u, v))
        if move in tabu or (u, v) in whitelist or (v, u) in blacklist:
            continue
        if max_indegree is not None and len(parents[u]) >= max_indegree:
            continue
        if _reachable(children, u, v, skip_edge=(u, v)):
            continue
        yield move


def move_delta(cache, parents, move) -> float:
    op, (u, v) = move
    pv = parents[v]
    if op == "+":
        return cache(v, pv | {u}) - cache(v, pv)
    if op == "-":
        return cache(v, pv - {u}) - cache(v, pv)
    pu = parents[u]
    return (cache(v, pv - {u}) - cache(v, pv)) + (cache(u, pu | {v}) - cache(u, pu))


def _inverse(move):
    op, (u, v) = move
    return {"+": ("-", (u, v)), "-": ("+", (u, v)), "flip": ("flip", (v, u))}[op]


def _apply(parents, children, move):
    op, (u, v) = move
    if op in ("-", "flip"):
        parents[v].discard(u)
        children[u].discard(v)
    if op == "+":
        parents[v].add(u)
        children[u].add(v)
    if op == "flip":
        parents[u].add(v)
        children[v].add(u)


def _edge_set(edges, nodes, what):
    out = set()
    for e in edges or ():
        u, v = tuple(e)
        for n in (u, v):
            if n not in nodes:
                raise UnknownVariable(f"{what} edge mentions unknown variable {n!r}")
        out.add((u, v))
    return out


def _climb(cache, parents, children, nodes, max_indegree, tabu_length, whitelist, blacklist, max_iter):
    """Greedy ascent in place; returns the total score after each accepted move."""
    total = cache.total(parents)
    trace = [total]
    tabu = deque(maxlen=int(tabu_length)) if tabu_length and tabu_length > 0 else None
    for _ in range(int(max_iter)):
        best, best_delta = None, None
        forbidden = set(tabu) if tabu is not None else set()
        for move in legal_moves(parents, children, nodes, max_indegree, forbidden, whitelist, blacklist):
            delta = move_delta(cache, parents, move)
            if best is None or delta > best_delta + TIE_EPS:
                best, best_delta = move, delta
        if best is None or best_delta <= IMPROVEMENT_EPS:
            break
        _apply(parents, children, best)
        if tabu is not None:
            tabu.append(_inverse(best))
        total += best_delta
        trace.append(total)
    return trace


def hill_climb(
    data,
    method=None,
    start: Dag | None = None,
    max_indegree=None,
    tabu_length=100,
    whitelist=None,
    blacklist=None,
    max_iter=10**6,
    variables=None,
    return_trace=False,
    restarts=10,
    perturb=3,
    seed=0,
):
    """Greedy search for a high-scoring DAG.

    Each step applies the legal add/delete/reverse move with the largest
    score gain (ties go to the first move in enumeration order) and stops
    when no move gains more than 1e-9. The inverse of each applied move is
    kept on a tabu list of length ``tabu_length``. Only the local scores of
    families touched by a move are recomputed.

    Greedy ascent in DAG space can stall in a poor local optimum when an
    early edge gets the wrong orientation. After the first climb, each of
    ``restarts`` rounds applies ``perturb`` random legal moves to the best
    graph so far and climbs again; the result replaces the best graph only
    if it scores strictly higher. Every returned graph is a local optimum.

    Parameters
    ----------
    data : DataTable
    method : score name, Score instance or callable
    start : Dag, optional
        Initial graph (default: empty).
    max_indegree : int, optional
    tabu_length : int
    whitelist : iterable of (u, v)
        Edges that must be present; they are added to ``start`` if missing.
    blacklist : iterable of (u, v)
        Edges that may never be added.
    max_iter : int
        Move budget per climb.
    variables : iterable of str, optional
        Defaults to every data column.
    return_trace : bool
        Also return the best total score after each accepted move.
    restarts : int
        Number of perturbation restarts; 0 gives plain greedy ascent.
    perturb : int
        Random moves applied before each restart.
    seed : int
        Seeds the perturbations.
    """
    score = get_score(method)
    nodes = sorted(variables if variables is not None else data.columns)
    node_set = set(nodes)
    whitelist = _edge_set(whitelist, node_set, "whitelist")
    blacklist = _edge_set(blacklist, node_set, "blacklist")
    if whitelist & blacklist:
        raise InvalidConstraints(f"edges both white- and blacklisted: {sorted(whitelist & blacklist)}")
    start = start if start is not None else Dag(nodes=nodes)
    if start.nodes != node_set:
        raise InvalidConstraints("start graph must have exactly the search variables as nodes")
    if start.edges & blacklist:
        raise InvalidConstraints(f"start graph contains blacklisted edges {sorted(start.edges & blacklist)}")
    try:
        start = Dag(start.edges | whitelist, nodes=nodes)
    except CycleDetected as exc:
        raise InvalidConstraints(f"whitelist creates a cycle: {exc}") from None
    if max_indegree is not None and any(len(start.parents(n)) > max_indegree for n in nodes):
        raise InvalidConstraints("start graph exceeds max_indegree")

    cache = ScoreCache(data, score)
    args = (nodes, max_indegree, tabu_length, whitelist, blacklist, max_iter)
    parents = {n: set(start.parents(n)) for n in nodes}
    children = {n: set(start.children(n)) for n in nodes}
    trace = _climb(cache, parents, children, *args)
    best, best_total = parents, trace[-1]

    rng = np.random.default_rng(seed)
    for _ in range(int(restarts)):
        parents = {n: set(best[n]) for n in nodes}
        children = {n: {c for c in nodes if n in best[c]} for n in nodes}
        for _ in range(int(perturb)):
            moves = list(legal_moves(parents, children, nodes, max_indegree, set(), whitelist, blacklist))
            if not moves:
                break
            _apply(parents, children, moves[rng.integers(len(moves))])
        total = _climb(cache, parents, children, *args)[-1]
        if total > best_total + IMPROVEMENT_EPS:
            best, best_total = parents, total
            trace.append(total)

    dag = Dag([(p, c) for c in nodes for p in best[c]], nodes=nodes)
    if return_trace:
        return dag, trace
    return dag
