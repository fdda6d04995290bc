"""PC-Stable: order-independent skeleton search plus Meek orientation."""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import combinations

from bnkit.core.data import DataTable
from bnkit.core.graph import Dag, Pdag
from bnkit.exceptions import InvalidAlpha
from bnkit.learn.citests import ChiSquared, DSeparationOracle, ci_test


def check_alpha(alpha):
    if not (isinstance(alpha, (int, float)) and 0 < alpha < 1):
        raise InvalidAlpha(f"alpha must lie in (0, 1), got {alpha!r}")
    return float(alpha)


class IndependenceTester:
    """Counts calls and answers ``independent(x, y, z)``.

    Wraps either a dataset plus CI test or a d-separation oracle.
    """

    def __init__(self, data, alpha=0.05, method=ChiSquared):
        if isinstance(data, Dag):
            data = DSeparationOracle(data)
        self.oracle = data if isinstance(data, DSeparationOracle) else None
        self.data = None if self.oracle else data
        self.alpha = check_alpha(alpha)
        self.method = method
        self.n_tests = 0
        if self.oracle is not None:
            self.variables = list(self.oracle.variables)
        elif isinstance(data, DataTable):
            self.variables = sorted(data.columns)
        else:
            raise TypeError(f"expected a DataTable, Dag or DSeparationOracle, got {type(data).__name__}")

    def test(self, x, y, z=()):
        self.n_tests += 1
        if self.oracle is not None:
            return self.oracle(None, x, y, tuple(z))
        return ci_test(self.data, x, y, tuple(z), self.method)

    def independent(self, x, y, z=()) -> bool:
        return self.test(x, y, z).p_value >= self.alpha


@dataclass
class Skeleton:
    adjacency: dict
    sepsets: dict = field(default_factory=dict)

    def adjacent(self, a, b):
        return b in self.adjacency[a]


def stable_skeleton(tester: IndependenceTester, variables=None, max_cond_size=None) -> Skeleton:
    """Level-wise edge removal with adjacency sets frozen at each level."""
    variables = sorted(variables if variables is not None else tester.variables)
    adj = {v: set(variables) - {v} for v in variables}
    sepsets = {}
    level = 0
    while max_cond_size is None or level <= max_cond_size:
        frozen = {v: sorted(adj[v]) for v in variables}
        if all(len(frozen[v]) - 1 < level for v in variables):
            break
        for x in variables:
            for y in frozen[x]:
                if y not in adj[x]:
                    continue
                candidates = [v for v in frozen[x] if v != y]
                if len(candidates) < level:
                    continue
                for cond in combinations(candidates, level):
                    if tester.independent(x, y, cond):
                        adj[x].discard(y)
                        adj[y].discard(x)
                        sepsets[frozenset((x, y))] = frozenset(cond)
                        break
        level += 1
    return Skeleton(adj, sepsets)


class _Orienter:
    def __init__(self, adjacency):
        self.nodes = sorted(adjacency)
        self.undirected = {frozenset((a, b)) for a in adjacency for b in adjacency[a]}
        self.directed = set()

    def adjacent(self, a, b):
        return frozenset((a, b)) in self.undirected or (a, b) in self.directed or (b, a) in self.directed

    def is_undirected(self, a, b):
        return frozenset((a, b)) in self.undirected

    def orient(self, a, b) -> bool:
        key = frozenset((a, b))
        if key in self.undirected:
            self.undirected.discard(key)
            self.directed.add((a, b))
            return True
        return False

    def und_nbrs(self, a):
        return sorted(next(iter(e - {a})) for e in self.undirected if a in e)

    def parents(self, a):
        return sorted(u for u, v in self.directed if v == a)

    def children(self, a):
        return sorted(v for u, v in self.directed if u == a)

    def pdag(self):
        return Pdag(self.directed, self.undirected, nodes=self.nodes)


def orient_v_structures(o: _Orienter, skeleton: Skeleton):
    for y in o.nodes:
        nbrs = sorted(skeleton.adjacency[y])
        for x, z in combinations(nbrs, 2):
            if skeleton.adjacent(x, z):
                continue
            sep = skeleton.sepsets.get(frozenset((x, z)), frozenset())
            if y not in sep:
                # conflicting orientations from noisy tests: first one wins
                if (y, x) not in o.directed:
                    o.orient(x, y)
                if (y, z) not in o.directed:
                    o.orient(z, y)


def apply_meek_rules(o: _Orienter):
    """Apply Meek's rules 1-4 until nothing changes."""
    changed = True
    while changed:
        changed = False
        for e in sorted(tuple(sorted(e)) for e in o.undirected):
            for a, b in (e, e[::-1]):
                if not o.is_undirected(a, b):
                    break
                if _meek_orients(o, a, b):
                    o.orient(a, b)
                    changed = True
                    break


def _meek_orients(o, a, b) -> bool:
    """Whether some rule forces ``a - b`` into ``a -> b``."""
    # R1: c -> a - b, c and b nonadjacent
    if any(not o.adjacent(c, b) for c in o.parents(a) if c != b):
        return True
    # R2: a -> c -> b
    if any((c, b) in o.directed for c in o.children(a)):
        return True
    und_a = o.und_nbrs(a)
    # R3: a - c -> b <- d - a with c, d nonadjacent
    into_b = [c for c in und_a if (c, b) in o.directed]
    for c, d in combinations(into_b, 2):
        if not o.adjacent(c, d):
            return True
    # R4: a - d -> c -> b, a adjacent to c, b and d nonadjacent
    for c in o.parents(b):
        if c == a or not o.adjacent(a, c):
            continue
        for d in o.parents(c):
            if d != b and o.is_undirected(a, d) and not o.adjacent(b, d):
                return True
    return False


def orient_skeleton(skeleton: Skeleton) -> Pdag:
    o = _Orienter(skeleton.adjacency)
    orient_v_structures(o, skeleton)
    apply_meek_rules(o)
    return o.pdag()


def pc_stable(data, alpha=0.05, max_cond_size=None, method=ChiSquared) -> Pdag:
    """Learn a CPDAG with the PC-Stable algorithm.

    Parameters
    ----------
    data : DataTable, Dag or DSeparationOracle
        A Dag (or oracle) replaces statistical tests by d-separation.
    alpha : float in (0, 1)
        Pairs with p-value >= alpha are judged independent.
    max_cond_size : int, optional
        Largest conditioning set tried; unlimited by default.
    method : CI test name or callable
    """
    tester = IndependenceTester(data, alpha, method)
    skeleton = stable_skeleton(tester, max_cond_size=max_cond_size)
    return orient_skeleton(skeleton)


def cpdag_of(dag: Dag) -> Pdag:
    """Markov equivalence class of ``dag`` (skeleton, v-structures, Meek closure)."""
    adjacency = {n: dag.neighbors(n) for n in dag.nodes}
    o = _Orienter(adjacency)
    for a, c, b in sorted(dag.v_structures()):
        o.orient(a, c)
        o.orient(b, c)
    apply_meek_rules(o)
    return o.pdag()
