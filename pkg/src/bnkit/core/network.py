"""Conditional probability tables and the parameterized network type."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Mapping, Sequence

import numpy as np

from bnkit.core.factor import DiscreteFactor, factor_product
from bnkit.core.graph import Dag
from bnkit.exceptions import (
    CardinalityMismatch,
    InvalidModel,
    StateSpaceTooLarge,
    UnknownState,
    UnknownVariable,
)

CPD_ATOL = 1e-9


@dataclass(frozen=True)
class VariableMeta:
    """Name and ordered state labels of a discrete variable."""

    name: str
    states: tuple

    def __post_init__(self):
        if not isinstance(self.name, str) or not self.name:
            raise InvalidModel(f"variable name must be a nonempty string, got {self.name!r}")
        states = tuple(str(s) for s in self.states)
        object.__setattr__(self, "states", states)
        if len(states) < 2:
            raise InvalidModel(f"{self.name!r} needs at least 2 states, got {list(states)}")
        if len(set(states)) != len(states):
            raise InvalidModel(f"{self.name!r} has duplicate state labels {list(states)}")

    @property
    def card(self) -> int:
        return len(self.states)

    def index(self, label) -> int:
        """Integer code of ``label``; integer codes pass through."""
        if isinstance(label, (int, np.integer)) and not isinstance(label, bool):
            if 0 <= label < self.card:
                return int(label)
            raise UnknownState(f"state code {label} out of range for {self.name!r}")
        try:
            return self.states.index(str(label))
        except ValueError:
            raise UnknownState(
                f"{label!r} is not a state of {self.name!r} (states: {list(self.states)})"
            ) from None

    @classmethod
    def default(cls, name, card):
        return cls(name, tuple(str(i) for i in range(card)))


class TabularCpd:
    """P(child | parents) as a factor over ``parents + (child,)``.

    Parameters
    ----------
    child : str
    child_card : int
    values : array-like
        Flat (parent-major, child-fastest) or shaped ``parent_cards + (child_card,)``.
        Each row over the child states must sum to 1 within 1e-9.
    parents : sequence of str
    parent_cards : sequence of int

    Examples
    --------
    >>> cpd = TabularCpd("B", 2, [[0.7, 0.3], [0.2, 0.8]], parents=["A"], parent_cards=[2])
    >>> cpd.table().tolist()
    [[0.7, 0.3], [0.2, 0.8]]
    """

    __slots__ = ("child", "parents", "factor")

    def __init__(self, child, child_card, values, parents=(), parent_cards=()):
        parents = tuple(parents)
        parent_cards = tuple(int(c) for c in parent_cards)
        if len(parents) != len(parent_cards):
            raise InvalidModel("parents and parent_cards differ in length")
        if child in parents:
            raise InvalidModel(f"{child!r} cannot be its own parent")
        factor = DiscreteFactor(parents + (child,), parent_cards + (int(child_card),), values)
        sums = factor.values.reshape(-1, int(child_card)).sum(axis=1)
        bad = np.abs(sums - 1.0) > CPD_ATOL
        if np.any(bad):
            raise InvalidModel(
                f"CPD of {child!r} is not normalized: row sums {sums[bad][:5].tolist()}"
            )
        self.child = child
        self.parents = parents
        self.factor = factor

    @classmethod
    def from_factor(cls, child, factor: DiscreteFactor):
        parents = tuple(v for v in factor.scope if v != child)
        f = factor.transpose(parents + (child,))
        return cls(child, f.cards[-1], f.values, parents, f.cards[:-1])

    @property
    def child_card(self) -> int:
        return self.factor.cards[-1]

    @property
    def parent_cards(self) -> tuple:
        return self.factor.cards[:-1]

    @property
    def scope(self):
        return self.factor.scope

    def table(self) -> np.ndarray:
        """Values as a ``(n_parent_configs, child_card)`` array."""
        return self.factor.values.reshape(-1, self.child_card)

    def reorder_parents(self, parents: Sequence[str]) -> "TabularCpd":
        parents = tuple(parents)
        f = self.factor.transpose(parents + (self.child,))
        return TabularCpd(self.child, self.child_card, f.values, parents, f.cards[:-1])

    def __eq__(self, other):
        return isinstance(other, TabularCpd) and self.child == other.child and self.factor == other.factor

    __hash__ = None

    def allclose(self, other, atol=1e-9):
        return (
            isinstance(other, TabularCpd)
            and self.child == other.child
            and set(self.parents) == set(other.parents)
            and self.factor.allclose(other.factor, atol=atol)
        )

    def __repr__(self):
        return f"TabularCpd(child={self.child!r}, parents={list(self.parents)}, table={self.table().tolist()})"


class DiscreteBayesianNetwork:
    """A DAG with one CPD per node.

    Parameters
    ----------
    cpds : iterable of TabularCpd
    metas : mapping or iterable of VariableMeta, optional
        State labels; defaults to ``"0", "1", ...``.
    latents : iterable of str, optional
    metadata : dict, optional
        Opaque extra information (e.g. properties read from a BIF file).
    """

    def __init__(self, cpds: Iterable[TabularCpd], metas=None, latents=(), metadata=None):
        cpds = list(cpds)
        by_child = {}
        for cpd in cpds:
            if cpd.child in by_child:
                raise InvalidModel(f"more than one CPD for {cpd.child!r}")
            by_child[cpd.child] = cpd
        edges = [(p, c.child) for c in cpds for p in c.parents]
        for p, _ in edges:
            if p not in by_child:
                raise InvalidModel(f"parent {p!r} has no CPD")
        self.dag = Dag(edges, nodes=by_child)
        cards = {n: by_child[n].child_card for n in by_child}
        for cpd in cpds:
            for p, c in zip(cpd.parents, cpd.parent_cards):
                if cards[p] != c:
                    raise CardinalityMismatch(
                        f"{p!r} has cardinality {cards[p]} but CPD of {cpd.child!r} uses {c}"
                    )
        if metas is None:
            metas = {}
        elif not isinstance(metas, Mapping):
            metas = {m.name: m for m in metas}
        full = {}
        for n in sorted(by_child):
            m = metas.get(n) or VariableMeta.default(n, cards[n])
            if m.card != cards[n]:
                raise CardinalityMismatch(f"{n!r}: {m.card} state labels for cardinality {cards[n]}")
            full[n] = m
        extra = set(metas) - set(by_child)
        if extra:
            raise UnknownVariable(f"metadata for unknown variables {sorted(extra)}")
        latents = frozenset(latents)
        if not latents <= set(by_child):
            raise UnknownVariable(f"latent variables not in model: {sorted(latents - set(by_child))}")
        self.cpds = {n: by_child[n] for n in sorted(by_child)}
        self.metas = full
        self.latents = latents
        self.metadata = dict(metadata or {})

    @property
    def nodes(self):
        return self.dag.sorted_nodes()

    @property
    def cards(self) -> dict:
        return {n: m.card for n, m in self.metas.items()}

    def card(self, var) -> int:
        return self._meta(var).card

    def states(self, var) -> tuple:
        return self._meta(var).states

    def state_index(self, var, label) -> int:
        return self._meta(var).index(label)

    def _meta(self, var):
        try:
            return self.metas[var]
        except KeyError:
            raise UnknownVariable(f"unknown variable {var!r}") from None

    def cpd(self, var) -> TabularCpd:
        try:
            return self.cpds[var]
        except KeyError:
            raise UnknownVariable(f"unknown variable {var!r}") from None

    def parents(self, var) -> tuple:
        return self.cpd(var).parents

    def factors(self):
        return [c.factor for c in self.cpds.values()]

    def replace_cpds(self, cpds, latents=None) -> "DiscreteBayesianNetwork":
        """Copy with some CPDs swapped out (the graph follows the new CPDs)."""
        new = dict(self.cpds)
        for c in cpds:
            if c.child not in new:
                raise UnknownVariable(f"unknown variable {c.child!r}")
            new[c.child] = c
        return DiscreteBayesianNetwork(
            new.values(),
            metas=self.metas,
            latents=self.latents if latents is None else latents,
            metadata=self.metadata,
        )

    def allclose(self, other, atol=1e-9) -> bool:
        return (
            isinstance(other, DiscreteBayesianNetwork)
            and self.dag == other.dag
            and self.metas == other.metas
            and all(self.cpds[n].allclose(other.cpds[n], atol) for n in self.cpds)
        )

    def __repr__(self):
        return f"DiscreteBayesianNetwork(nodes={self.nodes}, edges={self.dag.sorted_edges()})"


def joint_distribution(bn: DiscreteBayesianNetwork, max_entries: int = 10**7) -> DiscreteFactor:
    """Full joint table, scope in topological order. Intended as an oracle."""
    size = 1
    for c in bn.cards.values():
        size *= c
    if size > max_entries:
        raise StateSpaceTooLarge(f"joint has {size} entries (cap {max_entries})")
    out = DiscreteFactor.unit()
    for n in bn.dag.topological_order():
        out = factor_product(out, bn.cpds[n].factor)
    return out
