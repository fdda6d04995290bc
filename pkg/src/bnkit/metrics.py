"""Model testing: data log-likelihood, structure score and correlation F1."""

from __future__ import annotations

import math
from dataclasses import dataclass
from itertools import combinations

import numpy as np

from bnkit.core.data import MISSING
from bnkit.core.graph import Dag, d_separated
from bnkit.core.network import DiscreteBayesianNetwork
from bnkit.exceptions import ImpossibleEvidence, LogZero, MissingDataPresent, UnknownVariable
from bnkit.infer.junction import build_junction_tree, calibrate
from bnkit.learn.citests import ChiSquared, ci_test, get_ci_test
from bnkit.learn.pc import check_alpha
from bnkit.learn.scores import get_score


def _aligned(bn: DiscreteBayesianNetwork, data):
    observed = [v for v in bn.nodes if v not in bn.latents]
    missing_cols = [v for v in observed if v not in data.columns]
    if missing_cols:
        raise UnknownVariable(f"data lacks columns for {missing_cols}")
    data = data.select(observed).recode({v: bn.metas[v] for v in observed})
    if data.has_missing():
        raise MissingDataPresent("log_likelihood needs complete rows over observed nodes")
    return observed, data


def row_log_likelihoods(bn: DiscreteBayesianNetwork, data) -> np.ndarray:
    """Per-row ``ln P(row)``; ``-inf`` where the model gives probability 0.

    Latent nodes (and data columns for them) are summed out exactly.
    """
    observed, data = _aligned(bn, data)
    codes = data.codes
    col = {v: j for j, v in enumerate(observed)}
    if not bn.latents:
        out = np.zeros(data.n_rows)
        with np.errstate(divide="ignore"):
            for v in bn.nodes:
                cpd = bn.cpd(v)
                scope = list(cpd.scope)
                idx = np.ravel_multi_index(tuple(codes[:, col[s]] for s in scope), cpd.factor.cards)
                out += np.log(cpd.factor.values.reshape(-1)[idx])
        return out
    jt = build_junction_tree(bn)
    patterns, inverse = np.unique(codes, axis=0, return_inverse=True)
    per_pattern = np.empty(len(patterns))
    for k, row in enumerate(patterns):
        try:
            cal = calibrate(jt, {v: int(c) for v, c in zip(observed, row)})
            per_pattern[k] = cal.log_evidence
        except ImpossibleEvidence:
            per_pattern[k] = -math.inf
    return per_pattern[np.asarray(inverse).reshape(-1)]


def log_likelihood(bn: DiscreteBayesianNetwork, data) -> float:
    """Weighted sum of ``ln P(row)`` over rows.

    Data columns are matched to model states by label. Columns for latent
    nodes are ignored.

    Raises
    ------
    LogZero
        Some row has probability 0; the error lists the (0-based) rows.
    MissingDataPresent
        A cell of an observed node is missing.
    """
    ll = row_log_likelihoods(bn, data)
    w = data.row_weights()
    bad = np.flatnonzero(np.isneginf(ll) & (w > 0))
    if bad.size:
        raise LogZero(bad.tolist())
    keep = w > 0
    return float(np.dot(w[keep], ll[keep]))


def structure_score(dag: Dag, data, method="bic") -> float:
    """Sum of local scores of every family in ``dag``."""
    score = get_score(method)
    return float(sum(score(v, list(dag.parents(v)), data) for v in dag.sorted_nodes()))


@dataclass(frozen=True)
class CorrelationScore:
    """F1 of model-implied dependence against data dependence, with counts."""

    f1: float
    precision: float
    recall: float
    tp: int
    fp: int
    fn: int
    tn: int

    def to_dict(self):
        return dict(self.__dict__)


def correlation_score(model, data, ci_method=ChiSquared, alpha=0.05) -> CorrelationScore:
    """Compare marginal dependencies implied by ``model`` with those in ``data``.

    A pair counts as dependent under the model when it is d-connected given
    the empty set, and dependent in the data when the CI test rejects
    independence at ``alpha``. Model labels are the predictions and data
    labels the ground truth; F1 is 0 when there are no true positives.

    Parameters
    ----------
    model : DiscreteBayesianNetwork or Dag
    data : DataTable
    ci_method : CI test name or callable
    alpha : float in (0, 1)
    """
    alpha = check_alpha(alpha)
    method = get_ci_test(ci_method)
    if isinstance(model, DiscreteBayesianNetwork):
        dag, latents = model.dag, model.latents
    else:
        dag, latents = model, frozenset()
    observed = sorted(v for v in dag.nodes if v not in latents)
    tp = fp = fn = tn = 0
    for x, y in combinations(observed, 2):
        predicted = not d_separated(dag, {x}, {y}, set())
        actual = ci_test(data, x, y, (), method).p_value < alpha
        if predicted and actual:
            tp += 1
        elif predicted:
            fp += 1
        elif actual:
            fn += 1
        else:
            tn += 1
    precision = tp / (tp + fp) if tp + fp else 0.0
    recall = tp / (tp + fn) if tp + fn else 0.0
    f1 = 2 * tp / (2 * tp + fp + fn) if tp else 0.0
    return CorrelationScore(f1, precision, recall, tp, fp, fn, tn)


__all__ = [
    "CorrelationScore",
    "MISSING",
    "correlation_score",
    "log_likelihood",
    "row_log_likelihoods",
    "structure_score",
]
