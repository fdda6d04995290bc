"""Dense discrete factors.

Values are stored as an ndarray of shape ``cards`` in C order, which is the
row-major, last-variable-fastest layout used by every file format here.
"""

from __future__ import annotations

from typing import Iterable, Sequence

import numpy as np

from bnkit.exceptions import (
    CardinalityMismatch,
    InvalidModel,
    StateOutOfRange,
    UnknownVariable,
    ZeroMass,
)


class DiscreteFactor:
    """A nonnegative table over an ordered scope of discrete variables.

    Parameters
    ----------
    scope : sequence of str
    cards : sequence of int
    values : array-like
        Either flat of length ``prod(cards)`` or already shaped ``cards``.

    Examples
    --------
    >>> f = DiscreteFactor(["A", "B"], [2, 2], [0.15, 0.35, 0.15, 0.35])
    >>> f.marginalize(["B"]).values.tolist()
    [0.5, 0.5]
    """

    __slots__ = ("scope", "cards", "values")

    def __init__(self, scope: Sequence[str], cards: Sequence[int], values):
        scope = tuple(scope)
        cards = tuple(int(c) for c in cards)
        if len(set(scope)) != len(scope):
            raise InvalidModel(f"duplicate variables in scope {scope}")
        if len(scope) != len(cards):
            raise InvalidModel("scope and cards differ in length")
        if any(c < 1 for c in cards):
            raise InvalidModel(f"cardinalities must be positive, got {cards}")
        arr = np.array(values, dtype=float)
        size = int(np.prod(cards, dtype=np.int64)) if cards else 1
        if arr.size != size:
            raise InvalidModel(f"expected {size} values for cards {cards}, got {arr.size}")
        arr = arr.reshape(cards)
        if not np.all(np.isfinite(arr)) or np.any(arr < 0):
            raise InvalidModel("factor values must be finite and nonnegative")
        arr.flags.writeable = False
        self.scope = scope
        self.cards = cards
        self.values = arr

    @classmethod
    def _trusted(cls, scope, cards, arr):
        # Skips validation for results of closed operations.
        f = object.__new__(cls)
        f.scope = tuple(scope)
        f.cards = tuple(cards)
        # asarray keeps 0-d tables 0-d; ascontiguousarray would not
        arr = np.asarray(arr, dtype=float, order="C")
        arr.flags.writeable = False
        f.values = arr
        return f

    @classmethod
    def unit(cls):
        return cls._trusted((), (), np.ones(()))

    def card(self, var) -> int:
        try:
            return self.cards[self.scope.index(var)]
        except ValueError:
            raise UnknownVariable(f"{var!r} not in factor scope {self.scope}") from None

    def total(self) -> float:
        return float(self.values.sum())

    def flat(self) -> np.ndarray:
        return self.values.reshape(-1)

    def product(self, other: "DiscreteFactor") -> "DiscreteFactor":
        return factor_product(self, other)

    def marginalize(self, variables: Iterable[str]) -> "DiscreteFactor":
        return factor_marginalize(self, variables)

    def reduce(self, assignments) -> "DiscreteFactor":
        return factor_reduce(self, assignments)

    def normalize(self) -> "DiscreteFactor":
        return factor_normalize(self)

    def transpose(self, scope: Sequence[str]) -> "DiscreteFactor":
        """Same table with axes reordered to ``scope``."""
        scope = tuple(scope)
        if sorted(scope) != sorted(self.scope):
            raise UnknownVariable(f"{scope} is not a permutation of {self.scope}")
        axes = [self.scope.index(v) for v in scope]
        return DiscreteFactor._trusted(
            scope, [self.cards[a] for a in axes], np.transpose(self.values, axes)
        )

    def sorted(self) -> "DiscreteFactor":
        return self.transpose(sorted(self.scope))

    def __mul__(self, other):
        return factor_product(self, other)

    def __eq__(self, other):
        if not isinstance(other, DiscreteFactor) or set(self.scope) != set(other.scope):
            return False
        o = other.transpose(self.scope)
        return self.cards == o.cards and np.array_equal(self.values, o.values)

    __hash__ = None

    def allclose(self, other: "DiscreteFactor", atol=1e-10) -> bool:
        if set(self.scope) != set(other.scope):
            return False
        o = other.transpose(self.scope)
        return self.cards == o.cards and bool(np.allclose(self.values, o.values, rtol=0, atol=atol))

    def __repr__(self):
        return f"DiscreteFactor(scope={list(self.scope)}, cards={list(self.cards)}, values={self.flat().tolist()})"


def _aligned(f: DiscreteFactor, scope, cards_of):
    """View of f.values broadcastable against a table over ``scope``."""
    axes = [f.scope.index(v) for v in scope if v in f.scope]
    arr = np.transpose(f.values, axes) if axes != list(range(len(axes))) else f.values
    shape = [cards_of[v] if v in f.scope else 1 for v in scope]
    return arr.reshape(shape)


def factor_product(a: DiscreteFactor, b: DiscreteFactor) -> DiscreteFactor:
    """Pointwise product; scope is ``a.scope`` followed by ``b``'s new variables."""
    cards_of = dict(zip(a.scope, a.cards))
    for v, c in zip(b.scope, b.cards):
        if cards_of.setdefault(v, c) != c:
            raise CardinalityMismatch(f"{v!r} has cardinality {cards_of[v]} vs {c}")
    scope = a.scope + tuple(v for v in b.scope if v not in a.scope)
    out = _aligned(a, scope, cards_of) * _aligned(b, scope, cards_of)
    cards = [cards_of[v] for v in scope]
    return DiscreteFactor._trusted(scope, cards, np.broadcast_to(out, cards))


def factor_marginalize(f: DiscreteFactor, variables: Iterable[str]) -> DiscreteFactor:
    """Sum out ``variables``; surviving variables keep their order."""
    variables = set(variables)
    missing = variables - set(f.scope)
    if missing:
        raise UnknownVariable(f"{sorted(missing)} not in factor scope {f.scope}")
    if not variables:
        return f
    axes = tuple(i for i, v in enumerate(f.scope) if v in variables)
    keep = [i for i in range(len(f.scope)) if i not in axes]
    return DiscreteFactor._trusted(
        [f.scope[i] for i in keep],
        [f.cards[i] for i in keep],
        f.values.sum(axis=axes),
    )


def factor_reduce(f: DiscreteFactor, assignments) -> DiscreteFactor:
    """Slice ``f`` at the given ``(variable, state)`` assignments."""
    if isinstance(assignments, dict):
        assignments = list(assignments.items())
    if not assignments:
        return f
    index = [slice(None)] * len(f.scope)
    removed = set()
    for var, state in assignments:
        if var not in f.scope:
            raise UnknownVariable(f"{var!r} not in factor scope {f.scope}")
        i = f.scope.index(var)
        if isinstance(state, (bool, np.bool_)) or not isinstance(state, (int, np.integer)):
            raise StateOutOfRange(f"state for {var!r} must be an integer code, got {state!r}")
        if not 0 <= state < f.cards[i]:
            raise StateOutOfRange(f"state {state} out of range for {var!r} (card {f.cards[i]})")
        index[i] = int(state)
        removed.add(i)
    keep = [i for i in range(len(f.scope)) if i not in removed]
    return DiscreteFactor._trusted(
        [f.scope[i] for i in keep], [f.cards[i] for i in keep], f.values[tuple(index)]
    )


def factor_normalize(f: DiscreteFactor) -> DiscreteFactor:
    total = f.values.sum()
    if not total > 0:
        raise ZeroMass("cannot normalize a factor with zero total mass")
    return DiscreteFactor._trusted(f.scope, f.cards, f.values / total)


def product_of(factors: Iterable[DiscreteFactor]) -> DiscreteFactor:
    out = DiscreteFactor.unit()
    for g in factors:
        out = factor_product(out, g)
    return out
