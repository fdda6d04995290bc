"""scikit-learn style wrappers around the learners and estimators.

Every estimator keeps its constructor arguments untouched (so
``get_params``/``set_params``/``clone`` work) and stores results in
trailing-underscore attributes after ``fit``. Inputs may be a DataTable, a
pandas DataFrame or a 2-D array of labels plus ``columns``.
"""

from __future__ import annotations

import numpy as np
from sklearn.base import BaseEstimator, ClassifierMixin
from sklearn.utils.validation import check_is_fitted

from bnkit.core.data import MISSING, DataTable
from bnkit.core.graph import Dag, Pdag, pdag_to_dag
from bnkit.core.network import DiscreteBayesianNetwork
from bnkit.exceptions import NotExtendable, UnknownVariable
from bnkit.fit.em import EmConfig, em_fit
from bnkit.fit.parameters import bayes_fit, mle_fit
from bnkit.infer.elimination import ve_query
from bnkit.learn.hillclimb import hill_climb
from bnkit.learn.mmhc import mmhc
from bnkit.learn.pc import IndependenceTester, orient_skeleton, stable_skeleton
from bnkit.learn.trees import chow_liu, tan
from bnkit.metrics import log_likelihood, structure_score


def check_data(X, columns=None, states=None) -> DataTable:
    """Coerce ``X`` to a DataTable.

    Parameters
    ----------
    X : DataTable, pandas.DataFrame or 2-D array-like of labels
    columns : sequence of str, optional
        Column names for array input (default ``X0``, ``X1``, ...).
    states : dict, optional
        Declared state labels per column.
    """
    if isinstance(X, DataTable):
        return X
    try:
        import pandas as pd

        if isinstance(X, pd.DataFrame):
            return DataTable.from_pandas(X, states=states)
    except ImportError:  # pragma: no cover - pandas is a dependency
        pass
    arr = np.asarray(X, dtype=object)
    if arr.ndim != 2:
        raise ValueError(f"expected 2-D data, got shape {arr.shape}")
    if columns is None:
        columns = [f"X{j}" for j in range(arr.shape[1])]
    if len(columns) != arr.shape[1]:
        raise ValueError(f"{len(columns)} column names for {arr.shape[1]} columns")
    rows = [[None if v is None or (isinstance(v, float) and np.isnan(v)) else str(v) for v in r] for r in arr]
    return DataTable.from_labels(columns, rows, states=states)


def check_dag(dag) -> Dag:
    if isinstance(dag, Dag):
        return dag
    if isinstance(dag, DiscreteBayesianNetwork):
        return dag.dag
    if isinstance(dag, Pdag):
        return pdag_to_dag(dag)
    return Dag(dag)


class _StructureEstimator(BaseEstimator):
    def _finish(self, graph, data):
        if isinstance(graph, Pdag):
            self.pdag_ = graph
            try:
                self.dag_ = pdag_to_dag(graph)
            except NotExtendable:
                self.dag_ = None
        else:
            self.dag_ = graph
        self.n_features_in_ = len(data.columns)
        self.feature_names_in_ = np.array(data.columns, dtype=object)
        return self

    def score(self, X, y=None, method="bic"):
        """Structure score of the learned DAG on ``X``."""
        check_is_fitted(self, "dag_")
        return structure_score(self.dag_, check_data(X), method)


class PC(_StructureEstimator):
    """PC-Stable. Sets ``pdag_``, ``dag_`` (a consistent extension, or None)
    and ``n_tests_``."""

    def __init__(self, alpha=0.05, ci_test="chi_square", max_cond_size=None):
        self.alpha = alpha
        self.ci_test = ci_test
        self.max_cond_size = max_cond_size

    def fit(self, X, y=None):
        data = check_data(X)
        tester = IndependenceTester(data, self.alpha, self.ci_test)
        pdag = orient_skeleton(stable_skeleton(tester, max_cond_size=self.max_cond_size))
        self.n_tests_ = tester.n_tests
        return self._finish(pdag, data)


class HillClimbSearch(_StructureEstimator):
    def __init__(
        self,
        scoring_method="bic",
        max_indegree=None,
        tabu_length=100,
        whitelist=None,
        blacklist=None,
        max_iter=10**6,
        restarts=10,
        perturb=3,
        random_state=0,
    ):
        self.scoring_method = scoring_method
        self.max_indegree = max_indegree
        self.tabu_length = tabu_length
        self.whitelist = whitelist
        self.blacklist = blacklist
        self.max_iter = max_iter
        self.restarts = restarts
        self.perturb = perturb
        self.random_state = random_state

    def fit(self, X, y=None, start=None):
        data = check_data(X)
        dag, trace = hill_climb(
            data,
            self.scoring_method,
            start=start,
            max_indegree=self.max_indegree,
            tabu_length=self.tabu_length,
            whitelist=self.whitelist,
            blacklist=self.blacklist,
            max_iter=self.max_iter,
            return_trace=True,
            restarts=self.restarts,
            perturb=self.perturb,
            seed=self.random_state,
        )
        self.score_trace_ = trace
        self.score_ = trace[-1]
        return self._finish(dag, data)


class MMHC(_StructureEstimator):
    def __init__(self, alpha=0.05, ci_test="chi_square", scoring_method="bic", max_cond_size=None, random_state=0):
        self.alpha = alpha
        self.ci_test = ci_test
        self.scoring_method = scoring_method
        self.max_cond_size = max_cond_size
        self.random_state = random_state

    def fit(self, X, y=None):
        data = check_data(X)
        dag = mmhc(data, self.alpha, self.ci_test, self.scoring_method, self.max_cond_size, seed=self.random_state)
        return self._finish(dag, data)


class ChowLiu(_StructureEstimator):
    def __init__(self, weight=None, root=None):
        self.weight = weight
        self.root = root

    def fit(self, X, y=None):
        data = check_data(X)
        return self._finish(chow_liu(data, self.weight, self.root), data)


class TAN(_StructureEstimator):
    """Tree Augmented Naive Bayes structure over ``X`` with ``class_var``."""

    def __init__(self, class_var=None, weight=None, root=None):
        self.class_var = class_var
        self.weight = weight
        self.root = root

    def fit(self, X, y=None):
        data = check_data(X)
        if self.class_var is None:
            raise ValueError("class_var is required")
        return self._finish(tan(data, self.class_var, self.weight, self.root), data)


class _ParameterEstimator(BaseEstimator):
    def score(self, X, y=None):
        """Log-likelihood of ``X`` under the fitted model."""
        check_is_fitted(self, "model_")
        return log_likelihood(self.model_, check_data(X))


class MaximumLikelihoodEstimator(_ParameterEstimator):
    def __init__(self, dag=None):
        self.dag = dag

    def fit(self, X, y=None):
        self.model_ = mle_fit(check_dag(self.dag), check_data(X))
        return self


class BayesianEstimator(_ParameterEstimator):
    def __init__(self, dag=None, prior="k2", ess=None):
        self.dag = dag
        self.prior = prior
        self.ess = ess

    def fit(self, X, y=None):
        self.model_ = bayes_fit(check_dag(self.dag), check_data(X), self.prior, self.ess)
        return self


class ExpectationMaximization(_ParameterEstimator):
    def __init__(self, dag=None, latents=(), max_iter=100, tol=1e-4, random_state=0, latent_states=None):
        self.dag = dag
        self.latents = latents
        self.max_iter = max_iter
        self.tol = tol
        self.random_state = random_state
        self.latent_states = latent_states

    def fit(self, X, y=None):
        config = EmConfig(self.max_iter, self.tol, self.random_state)
        result = em_fit(check_dag(self.dag), check_data(X), self.latents, config, self.latent_states)
        self.model_ = result.model
        self.log_likelihoods_ = result.log_likelihoods
        self.converged_ = result.converged
        self.n_iter_ = result.n_iter
        return self

    def score(self, X, y=None):
        """Observed-data log-likelihood; missing cells are summed out."""
        check_is_fitted(self, "model_")
        return _observed_ll(self.model_, check_data(X))


def _observed_ll(bn, data):
    from bnkit.fit.em import _expected_counts, _Patterns

    ll, _ = _expected_counts(bn, _Patterns(bn.nodes, data.recode(bn.metas), bn.latents), bn.nodes)
    return float(ll)


class TANClassifier(ClassifierMixin, BaseEstimator):
    """TAN structure plus Bayesian CPDs; predicts the class by exact inference.

    Parameters
    ----------
    weight, root : see :func:`bnkit.learn.tan`
    prior : str
        Prior for :func:`bnkit.fit.bayes_fit` (K2 smoothing by default).
    """

    def __init__(self, weight=None, root=None, prior="k2", ess=None):
        self.weight = weight
        self.root = root
        self.prior = prior
        self.ess = ess

    _CLASS = "__class__"

    def fit(self, X, y):
        data = check_data(X)
        y = np.asarray(y).astype(str)
        if y.shape[0] != data.n_rows:
            raise ValueError("X and y have different row counts")
        self.classes_ = np.unique(y)
        if len(self.classes_) < 2:
            raise ValueError("need at least two classes")
        full = DataTable.from_labels(
            list(data.columns) + [self._CLASS],
            [r + [c] for r, c in zip(data.labels(), y.tolist())],
            states={**{m.name: m.states for m in data.metas}, self._CLASS: tuple(self.classes_)},
            weights=data.weights,
        )
        self.dag_ = tan(full, self._CLASS, self.weight, self.root)
        self.model_ = bayes_fit(self.dag_, full, self.prior, self.ess)
        self.feature_names_in_ = np.array(data.columns, dtype=object)
        self.n_features_in_ = len(data.columns)
        return self

    def predict_proba(self, X):
        check_is_fitted(self, "model_")
        data = check_data(X, columns=list(self.feature_names_in_))
        features = list(self.feature_names_in_)
        for f in features:
            if f not in data.columns:
                raise UnknownVariable(f"missing feature column {f!r}")
        data = data.select(features).recode({f: self.model_.metas[f] for f in features})
        patterns, inverse = np.unique(data.codes, axis=0, return_inverse=True)
        probs = np.empty((len(patterns), len(self.classes_)))
        for k, row in enumerate(patterns):
            ev = {f: int(c) for f, c in zip(features, row) if c != MISSING}
            probs[k] = ve_query(self.model_, [self._CLASS], ev).values
        return probs[np.asarray(inverse).reshape(-1)]

    def predict(self, X):
        return self.classes_[np.argmax(self.predict_proba(X), axis=1)]


__all__ = [
    "BayesianEstimator",
    "ChowLiu",
    "ExpectationMaximization",
    "HillClimbSearch",
    "MMHC",
    "MaximumLikelihoodEstimator",
    "PC",
    "TAN",
    "TANClassifier",
    "check_dag",
    "check_data",
]
