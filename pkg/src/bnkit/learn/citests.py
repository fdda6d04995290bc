"""Conditional independence tests for discrete data."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np
from scipy.stats import chi2

from bnkit.core.graph import Dag, d_separated
from bnkit.exceptions import InsufficientData, UnknownVariable


@dataclass(frozen=True)
class CiResult:
    statistic: float
    dof: int
    p_value: float

    def independent(self, alpha: float) -> bool:
        return self.p_value >= alpha


def power_divergence_statistic(observed, expected, lambda_: float) -> float:
    """Cressie-Read statistic over cells with positive expected count.

    ``lambda_ = 1`` is Pearson's chi-squared, ``0`` the G statistic and
    ``-1`` the modified log-likelihood statistic. Empty observed cells
    contribute 0 whenever ``lambda_ > -1``.
    """
    o = np.asarray(observed, dtype=float)
    e = np.asarray(expected, dtype=float)
    mask = e > 0
    o, e = o[mask], e[mask]
    with np.errstate(divide="ignore", invalid="ignore"):
        if lambda_ == 0:
            terms = np.where(o > 0, o * np.log(o / e), 0.0)
            return float(2.0 * terms.sum())
        if lambda_ == -1:
            terms = e * np.log(e / o)
            return float(2.0 * terms.sum())
        if lambda_ > -1:
            terms = np.where(o > 0, o * (o / e) ** lambda_, 0.0) - o
        else:
            terms = o * (o / e) ** lambda_ - o
        return float(2.0 / (lambda_ * (lambda_ + 1.0)) * terms.sum())


def stratified_power_divergence(data, x, y, z, lambda_) -> CiResult:
    z = list(z)
    counts = data.counts([x, y] + z)
    rx, ry = counts.shape[:2]
    counts = counts.reshape(rx, ry, -1)
    if not counts.sum() > 0:
        raise InsufficientData(f"no complete rows to test {x!r} vs {y!r}")
    stat = 0.0
    dof = 0
    for s in range(counts.shape[2]):
        obs = counts[:, :, s]
        n = obs.sum()
        if not n > 0:
            continue
        rows = obs.sum(axis=1)
        cols = obs.sum(axis=0)
        expected = np.outer(rows, cols) / n
        stat += power_divergence_statistic(obs, expected, lambda_)
        dof += max(int((rows > 0).sum()) - 1, 0) * max(int((cols > 0).sum()) - 1, 0)
    stat = max(stat, 0.0)
    p = float(chi2.sf(stat, dof)) if dof > 0 else 1.0
    return CiResult(stat, dof, min(max(p, 0.0), 1.0))


@dataclass(frozen=True)
class PowerDivergence:
    """Cressie-Read power-divergence test stratified by the conditioning set."""

    lambda_: float = 1.0

    def __post_init__(self):
        if not np.isfinite(self.lambda_):
            raise ValueError("lambda_ must be finite")

    def __call__(self, data, x, y, z=()) -> CiResult:
        return stratified_power_divergence(data, x, y, z, self.lambda_)


ChiSquared = PowerDivergence(1.0)
GTest = PowerDivergence(0.0)
CressieRead = PowerDivergence(2.0 / 3.0)

_NAMED = {
    "chi_square": ChiSquared,
    "chi2": ChiSquared,
    "chisquared": ChiSquared,
    "pearsonr": ChiSquared,
    "g_test": GTest,
    "g_sq": GTest,
    "log_likelihood": GTest,
    "gtest": GTest,
    "cressie_read": CressieRead,
    "power_divergence": CressieRead,
}


def get_ci_test(method) -> Callable:
    """Resolve a test name, a ``PowerDivergence`` or a custom callable.

    A custom test is any ``f(data, x, y, z) -> CiResult``.
    """
    if method is None:
        return ChiSquared
    if isinstance(method, str):
        try:
            return _NAMED[method.lower().replace("-", "_")]
        except KeyError:
            raise ValueError(f"unknown CI test {method!r}; choose from {sorted(_NAMED)}") from None
    if callable(method):
        return method
    raise TypeError(f"CI test must be a name or a callable, got {method!r}")


def ci_test(data, x, y, z=(), method=ChiSquared) -> CiResult:
    """Test ``x`` independent of ``y`` given ``z``.

    Rows with a missing cell in any tested column are dropped. Weighted rows
    contribute their weight to every count.
    """
    z = [z] if isinstance(z, str) else list(z)
    if x == y:
        raise ValueError("x and y must differ")
    if x in z or y in z:
        raise ValueError("x and y must not be in the conditioning set")
    for v in [x, y, *z]:
        data.index(v)
    result = get_ci_test(method)(data, x, y, z)
    if not isinstance(result, CiResult):
        raise TypeError("custom CI tests must return a CiResult")
    return result


class DSeparationOracle:
    """Perfect CI test reading independencies off a known DAG.

    Returns p-value 1 for d-separated pairs and 0 otherwise, so any
    ``0 < alpha <= 1`` reproduces the DAG's independence model.
    """

    def __init__(self, dag: Dag, observed=None):
        self.dag = dag
        self.variables = sorted(observed) if observed is not None else dag.sorted_nodes()
        for v in self.variables:
            if v not in dag.nodes:
                raise UnknownVariable(f"unknown variable {v!r}")

    def __call__(self, data, x, y, z=()) -> CiResult:
        sep = d_separated(self.dag, {x}, {y}, set(z))
        return CiResult(0.0, 0, 1.0 if sep else 0.0)
