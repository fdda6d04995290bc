"""Max-Min Parents-Children and Max-Min Hill Climbing."""

from __future__ import annotations

from itertools import combinations

from bnkit.core.graph import Dag
from bnkit.learn.citests import ChiSquared
from bnkit.learn.hillclimb import hill_climb
from bnkit.learn.pc import IndependenceTester


def _subsets(items, max_size):
    top = len(items) if max_size is None else min(len(items), max_size)
    for k in range(top + 1):
        yield from combinations(items, k)


def _max_p(tester, x, target, cpc, max_cond_size):
    """Largest p-value over conditioning subsets of ``cpc`` (the min-association)."""
    best = 0.0
    for s in _subsets(cpc, max_cond_size):
        p = tester.test(x, target, s).p_value
        if p > best:
            best = p
            if best >= tester.alpha:
                break
    return best


def mmpc_single(tester, target, variables, max_cond_size=None) -> list:
    """Candidate parents-children of ``target`` (before symmetrization)."""
    cpc = []
    candidates = sorted(v for v in variables if v != target)
    while candidates:
        scored = []
        for x in candidates:
            scored.append((_max_p(tester, x, target, cpc, max_cond_size), x))
        candidates = [x for p, x in scored if p < tester.alpha]
        if not candidates:
            break
        _, chosen = min((p, x) for p, x in scored if p < tester.alpha)
        cpc.append(chosen)
        candidates.remove(chosen)
    for x in list(cpc):
        rest = [v for v in cpc if v != x]
        if any(tester.independent(x, target, s) for s in _subsets(rest, max_cond_size)):
            cpc.remove(x)
    return sorted(cpc)


def mmpc(data, alpha=0.05, method=ChiSquared, max_cond_size=None) -> dict:
    """Symmetrized candidate neighbour sets for every variable.

    ``data`` may be a DataTable, a Dag or a DSeparationOracle. ``Y`` stays a
    candidate of ``X`` only if ``X`` is also a candidate of ``Y``.
    """
    tester = IndependenceTester(data, alpha, method)
    variables = tester.variables
    raw = {t: set(mmpc_single(tester, t, variables, max_cond_size)) for t in variables}
    return {t: {x for x in raw[t] if t in raw[x]} for t in variables}


def mmhc(data, alpha=0.05, ci=ChiSquared, score=None, max_cond_size=None, **hc_kwargs) -> Dag:
    """Hill climbing from the empty graph, restricted to MMPC candidate edges."""
    candidates = mmpc(data, alpha, ci, max_cond_size)
    variables = sorted(candidates)
    blacklist = [(u, v) for u in variables for v in variables if u != v and v not in candidates[u]]
    return hill_climb(data, score, blacklist=blacklist, variables=variables, **hc_kwargs)
