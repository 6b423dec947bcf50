"""Scikit-learn style front end.

``SpreadMinimizer().fit(instance)`` solves the blocking problem on the
instance's scenarios; ``predict`` and ``score`` then evaluate the fitted
blocking on any instance over the same graph, typically one with freshly
sampled scenarios (out-of-sample check of the sample average solution).
"""
from __future__ import annotations

import os
from typing import Sequence

import numpy as np
from sklearn.base import BaseEstimator
from sklearn.utils.validation import check_is_fitted

from .graph import BudgetError, Instance, InstanceError, scenario_spreads
from .master import SETTINGS, SolverSettings, branch_and_benders_cut


def check_instance(X, budget: float | None = None) -> Instance:
    """Accept an :class:`Instance` or a path to an instance file."""
    if isinstance(X, (str, os.PathLike)):
        from .io import load_instance
        X = load_instance(X)
    if not isinstance(X, Instance):
        raise TypeError(f"expected an Instance or a path, got {type(X).__name__}")
    if X.scenario_count == 0:
        raise InstanceError("instance has no scenarios")
    if budget is not None:
        X = X.with_budget(budget)
    return X


def check_blocking(blocking, instance: Instance, check_budget: bool = True) -> list[int]:
    """Normalize a label list or a 0/1 vector of length |K| to a sorted label list."""
    arr = np.asarray(blocking)
    if arr.dtype == bool or (arr.ndim == 1 and len(arr) == instance.label_count
                             and arr.size and np.isin(arr, (0, 1)).all()
                             and not np.issubdtype(arr.dtype, np.integer)):
        labels = [int(k) for k in np.flatnonzero(arr.astype(float) > 0.5)]
    else:
        labels = sorted({int(k) for k in arr.reshape(-1).tolist()})
    for k in labels:
        if not 0 <= k < instance.label_count:
            raise InstanceError(f"label {k} out of range")
    if check_budget and not instance.is_feasible(labels):
        raise BudgetError(f"blocking {labels} is not budget feasible")
    return labels


class SpreadMinimizer(BaseEstimator):
    """Choose labels to block so the average scenario spread is minimal.

    Parameters
    ----------
    setting : one of ``lp, i, i+, i+s, i+sf, i+sfp, i+sfh, g``
    tau : fraction of scenarios to collect violated cuts from per round
        (defaults to 0.2 for the sampled settings and 1 otherwise)
    time_limit : seconds
    budget : overrides the instance budget when given
    """

    def __init__(self, setting: str = "i+sfp", tau: float | None = None,
                 time_limit: float = 3600.0, budget: float | None = None):
        self.setting = setting
        self.tau = tau
        self.time_limit = time_limit
        self.budget = budget

    def fit(self, X, y=None):
        instance = check_instance(X, self.budget)
        if self.setting not in SETTINGS:
            raise ValueError(f"setting must be one of {SETTINGS}")
        settings = SolverSettings.from_name(self.setting, self.tau, self.time_limit)
        report = branch_and_benders_cut(instance, settings)
        self.report_ = report
        self.blocked_labels_ = list(report.blocking)
        self.objective_ = report.UB
        self.lower_bound_ = report.LB
        self.n_labels_in_ = instance.label_count
        return self

    def predict(self, X) -> np.ndarray:
        """Spread per scenario of ``X`` under the fitted blocking."""
        check_is_fitted(self, "blocked_labels_")
        instance = check_instance(X)
        if instance.label_count != self.n_labels_in_:
            raise InstanceError("instance has a different label set than the fitted one")
        return np.array(scenario_spreads(instance, self.blocked_labels_))

    def score(self, X, y=None) -> float:
        """Negated average spread, so that larger is better."""
        return -float(np.mean(self.predict(X)))

    def blocking_vector(self) -> np.ndarray:
        check_is_fitted(self, "blocked_labels_")
        x = np.zeros(self.n_labels_in_)
        x[self.blocked_labels_] = 1.0
        return x


def evaluate_blocking(instance: Instance, blocking: Sequence[int]) -> np.ndarray:
    labels = check_blocking(blocking, instance, check_budget=False)
    return np.array(scenario_spreads(instance, labels))
