"""Decomposable structure scores (higher is better)."""

from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.special import gammaln

from bnkit.exceptions import InsufficientData


def _family(child, parents, data):
    parents = sorted(parents)
    if child in parents:
        raise ValueError(f"{child!r} cannot be its own parent")
    r = data.card(child)
    counts = data.counts(parents + [child]).reshape(-1, r)
    if not counts.sum() > 0:
        raise InsufficientData(f"no complete rows for the family of {child!r}")
    return counts


def log_likelihood_term(counts) -> float:
    """Sum of N_ijk ln(N_ijk / N_ij) over nonzero cells."""
    nij = counts.sum(axis=1, keepdims=True)
    nz = counts > 0
    ratio = np.divide(counts, nij, out=np.ones_like(counts), where=nz)
    return float(np.sum(counts[nz] * np.log(ratio[nz])))


def _dirichlet_score(counts, alpha):
    """log marginal likelihood of ``counts`` (q x r) under cell priors ``alpha``."""
    a_j = alpha.sum(axis=1)
    n_j = counts.sum(axis=1)
    return float(
        np.sum(gammaln(a_j) - gammaln(a_j + n_j))
        + np.sum(gammaln(alpha + counts) - gammaln(alpha))
    )


class Score:
    """Base class: ``score(child, parents, data)`` returns the local score."""

    name = "score"

    def __call__(self, child, parents, data) -> float:
        return self.local(_family(child, parents, data))

    def local(self, counts) -> float:  # pragma: no cover - abstract
        raise NotImplementedError


@dataclass(frozen=True)
class BIC(Score):
    name = "bic"

    def local(self, counts):
        q, r = counts.shape
        n = counts.sum()
        return log_likelihood_term(counts) - 0.5 * math.log(n) * (r - 1) * q


@dataclass(frozen=True)
class AIC(Score):
    name = "aic"

    def local(self, counts):
        q, r = counts.shape
        return log_likelihood_term(counts) - (r - 1) * q


@dataclass(frozen=True)
class K2(Score):
    name = "k2"

    def local(self, counts):
        return _dirichlet_score(counts, np.ones_like(counts))


@dataclass(frozen=True)
class BDeu(Score):
    ess: float = 1.0
    name = "bdeu"

    def __post_init__(self):
        if not self.ess > 0:
            raise ValueError("ess must be positive")

    def local(self, counts):
        q, r = counts.shape
        return _dirichlet_score(counts, np.full(counts.shape, self.ess / (q * r)))


@dataclass(frozen=True)
class BDs(Score):
    """BDeu with the prior mass spread only over observed parent configurations."""

    ess: float = 1.0
    name = "bds"

    def __post_init__(self):
        if not self.ess > 0:
            raise ValueError("ess must be positive")

    def local(self, counts):
        r = counts.shape[1]
        seen = counts.sum(axis=1) > 0
        q_seen = int(seen.sum())
        return _dirichlet_score(counts[seen], np.full((q_seen, r), self.ess / (q_seen * r)))


class CustomScore(Score):
    """Wraps ``func(child, parents, data) -> float``."""

    name = "custom"

    def __init__(self, func: Callable):
        self.func = func

    def __call__(self, child, parents, data):
        return float(self.func(child, tuple(sorted(parents)), data))

    def __repr__(self):
        return f"CustomScore({self.func!r})"


_NAMED = {"bic": BIC, "aic": AIC, "k2": K2, "bdeu": BDeu, "bds": BDs}


def get_score(method, ess=None) -> Score:
    """Resolve a score name, instance or plain callable."""
    if method is None:
        return BIC()
    if isinstance(method, Score):
        return method
    if isinstance(method, str):
        key = method.lower().replace("-", "_")
        for suffix in ("_d", "score"):
            if key.endswith(suffix) and key[: -len(suffix)] in _NAMED:
                key = key[: -len(suffix)]
        if key not in _NAMED:
            raise ValueError(f"unknown score {method!r}; choose from {sorted(_NAMED)}")
        cls = _NAMED[key]
        if cls in (BDeu, BDs) and ess is not None:
            return cls(ess)
        return cls()
    if callable(method):
        return CustomScore(method)
    raise TypeError(f"score must be a name, Score or callable, got {method!r}")


def local_score(child, parents, data, method=None) -> float:
    """Local score of ``child`` with the given parent set."""
    return get_score(method)(child, parents, data)
