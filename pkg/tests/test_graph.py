import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference as ref
from conftest import random_instance
from mbsmp.graph import (BudgetError, Instance, InstanceError, LabeledDigraph, ScenarioSet,
                         as_label_set, eval_objective, eval_spread, extended_seed_sets,
                         pure_label_path_closure, reach_set, scenario_spreads)


def one_based(nodes):
    return {v + 1 for v in nodes}


def test_reach_set_figure1_examples(figure1):
    # scenario indices are 0-based: paper scenario 1 is w=0
    assert one_based(reach_set(figure1, 0, {2})) == {1, 3, 4, 5, 6}
    assert one_based(reach_set(figure1, 1, ())) == {1, 2, 3, 4, 5, 6}
    assert reach_set(figure1, 2, {0, 1, 2, 3}) == {0, 3}


def test_eval_spread_figure1_examples(figure1):
    assert eval_spread(figure1, {0}, 1) == 3
    assert one_based(reach_set(figure1, 1, {0})) == {1, 4, 6}
    assert eval_spread(figure1, {2}, 2) == 5


def test_spread_without_arcs():
    g = LabeledDigraph.from_arcs(4, [], 1)
    inst = Instance(g, (1,), 0, (0, 2), ScenarioSet((np.array([], dtype=int),)))
    assert eval_spread(inst, (), 0) == 2


def test_eval_objective_figure1(figure1):
    assert eval_objective(figure1, {2}) == Fraction(14, 3)
    assert eval_objective(figure1, {0}) == Fraction(11, 3)
    # the remaining single-label values, counted by hand from the three scenarios
    assert eval_objective(figure1, {1}) == 6
    assert eval_objective(figure1, {3}) == Fraction(17, 3)


def test_eval_objective_budget_check(figure1):
    with pytest.raises(BudgetError):
        eval_objective(figure1, {0, 1}, check_budget=True)
    assert eval_objective(figure1, {0, 1}) == ref.objective(figure1, {0, 1})


def test_figure3_values(figure3):
    f = lambda s: eval_objective(figure3, s)  # noqa: E731
    assert (f({3}), f({2, 3}), f({1, 3}), f({1, 2, 3})) == (6, 5, 6, 3)
    assert (f({0, 3}), f({0, 2, 3})) == (4, 4)


def test_invalid_scenario_index(figure1):
    with pytest.raises(IndexError):
        reach_set(figure1, 3)


def test_duplicate_arcs_rejected():
    with pytest.raises(InstanceError):
        LabeledDigraph.from_arcs(2, [(0, 1, 0), (0, 1, 0)], 2)
    g = LabeledDigraph.from_arcs(2, [(0, 1, 0), (0, 1, 1)], 2)
    assert g.arc_count == 2


@pytest.mark.parametrize("arcs", [[(0, 2, 0)], [(0, 1, 3)], [(-1, 1, 0)]])
def test_out_of_range_arcs_rejected(arcs):
    with pytest.raises(InstanceError):
        LabeledDigraph.from_arcs(2, arcs, 2)


def test_scenario_duplicates_and_range():
    g = LabeledDigraph.from_arcs(2, [(0, 1, 0)], 1)
    with pytest.raises(InstanceError):
        ScenarioSet((np.array([0, 0]),))
    with pytest.raises(InstanceError):
        Instance(g, (1,), 1, (0,), ScenarioSet((np.array([1]),)))


@pytest.mark.parametrize("kwargs", [dict(seeds=()), dict(seeds=(5,)), dict(costs=(-1.0,)),
                                    dict(budget=-1), dict(costs=(1.0, 1.0))])
def test_instance_validation(kwargs):
    g = LabeledDigraph.from_arcs(2, [(0, 1, 0)], 1)
    args = dict(graph=g, costs=(1.0,), budget=1, seeds=(0,), scenarios=ScenarioSet((np.array([0]),)))
    args.update(kwargs)
    with pytest.raises(InstanceError):
        Instance(**args)


def test_from_undirected_doubles_edges():
    g = LabeledDigraph.from_undirected(3, [(0, 1, 2), (1, 2, 0)], 3)
    assert sorted(g.arcs()) == [(0, 1, 2), (1, 0, 2), (1, 2, 0), (2, 1, 0)]


def test_extended_seeds_figure1(figure1):
    inst = Instance(figure1.graph, (math.inf, 1, 1, 1), 1, figure1.seeds, figure1.scenarios)
    ext = extended_seed_sets(inst)
    assert one_based(ext[0]) == {1, 3, 4}
    assert extended_seed_sets(figure1) == [frozenset(figure1.seeds)] * 3


def test_extended_seeds_all_unblockable(figure1):
    inst = Instance(figure1.graph, (math.inf,) * 4, 1, figure1.seeds, figure1.scenarios)
    assert extended_seed_sets(inst) == [frozenset(reach_set(inst, w)) for w in range(3)]


def test_closure_chain_example():
    g = LabeledDigraph.from_arcs(3, [(0, 1, 5), (1, 2, 5)], 6)
    inst = Instance(g, (1,) * 6, 1, (0,), ScenarioSet((np.array([0, 1]),)))
    closed = pure_label_path_closure(inst)
    live = {closed.graph.arc(a) for a in closed.scenarios[0].tolist()}
    assert live == {(0, 1, 5), (1, 2, 5), (0, 2, 5)}


def test_closure_figure1_no_mixed_shortcut(figure1):
    closed = pure_label_path_closure(figure1)
    live = {closed.graph.arc(a) for a in closed.scenarios[0].tolist()}
    assert (0, 5, 0) not in live and (0, 5, 2) not in live


def test_as_label_set():
    assert as_label_set([0, 1.0, 0.9999999, 0.5]) == [1, 2]


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), blocked=st.sets(st.integers(0, 4)))
def test_reach_matches_reference(seed, blocked):
    inst = random_instance(seed)
    for w in range(inst.scenario_count):
        assert eval_spread(inst, blocked, w) == ref.spread(inst, w, blocked)


@settings(max_examples=60, deadline=None)
@given(seed=st.integers(0, 10**6), small=st.sets(st.integers(0, 4)), extra=st.sets(st.integers(0, 4)))
def test_reach_monotone(seed, small, extra):
    inst = random_instance(seed)
    for w in range(inst.scenario_count):
        assert reach_set(inst, w, small | extra) <= reach_set(inst, w, small)
    f_empty = eval_objective(inst)
    assert f_empty >= eval_objective(inst, small) >= len(inst.seeds)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_extended_seeds_brute_force(seed):
    inst = random_instance(seed, n=15, arcs=40)
    ext = extended_seed_sets(inst)
    for w in range(inst.scenario_count):
        assert ext[w] == ref.extended_seeds(inst, w)
        assert set(inst.seeds) <= ext[w]


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6), blocked=st.sets(st.integers(0, 4)))
def test_closure_idempotent_and_reach_preserving(seed, blocked):
    inst = random_instance(seed, labels=3, arcs=30)
    blocked = {k for k in blocked if k < 3}
    once = pure_label_path_closure(inst)
    twice = pure_label_path_closure(once)
    assert once == twice
    assert scenario_spreads(once, blocked) == scenario_spreads(inst, blocked)
