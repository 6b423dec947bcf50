from fractions import Fraction

import numpy as np
import pytest
from sklearn.base import clone
from sklearn.exceptions import NotFittedError

import reference as ref
from conftest import data_path
from mbsmp import SpreadMinimizer, check_blocking, check_instance
from mbsmp.bench import mean_rows
from mbsmp.estimator import evaluate_blocking
from mbsmp.generate import sample_scenarios
from mbsmp.graph import BudgetError, InstanceError


def test_fit_figure1(figure1):
    est = SpreadMinimizer(setting="i").fit(figure1)
    assert est.blocked_labels_ == [0]
    assert est.objective_ == Fraction(11, 3)
    np.testing.assert_array_equal(est.predict(figure1), [4, 3, 4])
    assert est.score(figure1) == pytest.approx(-11 / 3)
    np.testing.assert_array_equal(est.blocking_vector(), [1, 0, 0, 0])


def test_fit_from_path_with_budget_override():
    est = SpreadMinimizer(setting="i+sfp", budget=0).fit(data_path("figure1.txt"))
    assert est.blocked_labels_ == []


def test_out_of_sample_predict(figure1):
    est = SpreadMinimizer(setting="i+s").fit(figure1)
    fresh = figure1.with_scenarios(sample_scenarios(figure1.graph, 1.0, 2))
    # full graph minus label 0 still reaches nodes 1, 2, 4, 5, 6
    expected = [ref.spread(fresh, w, {0}) for w in range(2)]
    np.testing.assert_array_equal(est.predict(fresh), expected)
    assert expected == [5, 5]


def test_params_and_clone():
    est = SpreadMinimizer(setting="lp", tau=0.5, time_limit=10)
    assert est.get_params() == {"setting": "lp", "tau": 0.5, "time_limit": 10, "budget": None}
    twin = clone(est)
    assert twin.get_params() == est.get_params() and twin is not est
    est.set_params(setting="i")
    assert est.setting == "i"


def test_not_fitted(figure1):
    with pytest.raises(NotFittedError):
        SpreadMinimizer().predict(figure1)


def test_bad_setting(figure1):
    with pytest.raises(ValueError):
        SpreadMinimizer(setting="cplex").fit(figure1)


def test_check_instance_rejects_other_types():
    with pytest.raises(TypeError):
        check_instance(np.zeros(3))


def test_check_blocking_forms(figure1):
    assert check_blocking([0], figure1) == [0]
    assert check_blocking(np.array([1.0, 0, 0, 0]), figure1) == [0]
    assert check_blocking(np.array([True, False, True, False]), figure1, check_budget=False) == [0, 2]
    with pytest.raises(BudgetError):
        check_blocking([0, 1], figure1)
    with pytest.raises(InstanceError):
        check_blocking([7], figure1)


def test_evaluate_blocking(figure1):
    np.testing.assert_array_equal(evaluate_blocking(figure1, [2]), [5, 4, 5])


def test_mean_rows():
    rows = [dict(instance="a", setting="i", t_s="1", UB="2", LB="2", gap="0", LB0="1",
                 nBB="3", nIntCut="4", nFrCut="0", opt="1"),
            dict(instance="b", setting="i", t_s="3", UB="4", LB="3", gap="25", LB0="2",
                 nBB="5", nIntCut="6", nFrCut="0", opt="0")]
    (m,) = mean_rows(rows)
    assert m["instance"] == "mean" and m["opt"] == "1"
    assert float(m["t_s"]) == 2 and float(m["gap"]) == 12.5
