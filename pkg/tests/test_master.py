import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import reference as ref
from conftest import random_instance
from mbsmp.graph import InstanceError, eval_objective, extended_seed_sets
from mbsmp.master import (SETTINGS, MasterModel, SolverSettings, abf_lp_bound,
                          branch_and_benders_cut, brute_force_oracle, greedy_heuristic,
                          initial_cuts, root_bound)
from mbsmp.separation import BendersCut

EXACT = [s for s in SETTINGS if s != "g"]


@pytest.mark.parametrize("name, tau, lift, frac, plus, lp", [
    ("lp", 1.0, "N", False, False, True),
    ("i", 1.0, "N", False, False, False),
    ("i+", 1.0, "N", False, True, False),
    ("i+s", 0.2, "N", False, True, False),
    ("i+sf", 0.2, "N", True, True, False),
    ("i+sfp", 0.2, "P", True, True, False),
    ("i+sfh", 0.2, "H", True, True, False),
])
def test_setting_defaults(name, tau, lift, frac, plus, lp):
    s = SolverSettings.from_name(name)
    assert (s.tau, s.lift, s.fractional_separation, s.lp_separation) == (tau, lift, frac, lp)
    assert s.extended_seeds == s.greedy_start == s.initial_cuts == plus


def test_unknown_setting():
    with pytest.raises(ValueError):
        SolverSettings.from_name("cplex")


def test_empty_pool_master(figure1):
    ext = extended_seed_sets(figure1)
    model = MasterModel(figure1, [len(s) for s in ext])
    sol = model.solve()
    assert sol.objective == pytest.approx(2.0)
    assert not sol.theta.any()


def test_large_budget_blocks_everything(figure1):
    inst = figure1.with_budget(10)
    model = MasterModel(inst, [2, 2, 2])
    model.add_cuts(initial_cuts(inst, []))
    sol = model.solve()
    # all-ones attains the optimum (alternative optima may exist)
    ones = [1.0] * 4
    at_ones = 2 + sum(max(0.0, c.rhs(ones)) for c in model.cuts) / 3
    assert sol.objective == pytest.approx(at_ones)


def test_cut_pool_dedup(figure1):
    model = MasterModel(figure1, [2, 2, 2])
    cut = BendersCut(0, 3, (1, 0, 1, 0))
    assert len(model.add_cuts([cut, cut])) == 1
    assert model.add_cuts([BendersCut(0, 3.0, (1.0, 0.0, 1.0, 0.0))]) == []
    assert len(model.cuts) == 1


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_working_set_solves_over_whole_pool(seed):
    inst = random_instance(seed, n=12, arcs=30, labels=5, scenarios=3, budget=2)
    rng = np.random.default_rng(seed)
    model = MasterModel(inst, [2, 2, 2])
    model.row_limit = 0  # purge after every solve
    for _ in range(6):
        model.add_cuts(initial_cuts(inst, [k for k in range(1, 5) if rng.random() > 0.5]))
        model.set_fixings({int(rng.integers(1, 5)): int(rng.integers(2))})
        sol = model.solve()
        full = MasterModel(inst, [2, 2, 2])
        full.row_limit = math.inf
        full.add_cuts(model.cuts)
        full.set_fixings({k: v for k, v in enumerate(model.lp.ub[:5]) if v == model.lp.lb[k]})
        expect = full.solve()
        assert sol.status == expect.status
        if sol.status == "optimal":
            assert sol.objective == pytest.approx(expect.objective, abs=1e-9)
            for cut in model.cuts:
                assert sol.theta[cut.scenario] >= cut.rhs(sol.x) - 1e-7
    assert len(model.active) <= len(model.cuts)


@settings(max_examples=40, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_master_lp_matches_tableau(seed):
    inst = random_instance(seed, n=12, arcs=30, labels=5, scenarios=3, budget=2)
    rng = np.random.default_rng(seed)
    model = MasterModel(inst, [2, 2, 2])
    for _ in range(4):
        x = rng.random(5).tolist()
        model.add_cuts(initial_cuts(inst, [k for k in range(1, 5) if x[k] > 0.5]))
    sol = model.solve()
    nk, nw = 5, 3
    A = [np.concatenate([[0.0 if math.isinf(c) else c for c in inst.costs], np.zeros(nw)])]
    b = [inst.budget]
    for cut in model.cuts:
        row = np.zeros(nk + nw)
        row[:nk] = -np.asarray(cut.coefficients, float)
        row[nk + cut.scenario] = -1
        A.append(row)
        b.append(-cut.constant)
    c = np.concatenate([np.zeros(nk), np.full(nw, 1 / nw)])
    ub = np.concatenate([[0.0], np.ones(nk - 1), np.full(nw, np.inf)])
    status, _, obj = ref.tableau_linprog(c, np.array(A), np.array(b), np.zeros(nk + nw), ub)
    assert status == "optimal"
    assert sol.objective == pytest.approx(obj + 2.0, abs=1e-9)


def test_greedy_figure1(figure1):
    assert greedy_heuristic(figure1) == ([0], Fraction(11, 3))
    assert greedy_heuristic(figure1.with_budget(0)) == ([], eval_objective(figure1))
    assert greedy_heuristic(figure1.with_budget(4))[0] == [0, 1, 2, 3]


def test_initial_cuts_count_and_exactness(figure1):
    cuts = initial_cuts(figure1, [0])
    assert len(cuts) == 3
    x = [1.0, 0, 0, 0]
    for cut in cuts:
        assert cut.rhs(x) == ref.spread(figure1, cut.scenario, {0}) - 2


def test_initial_cuts_tighten_relaxation():
    inst = random_instance(5, n=20, arcs=60, scenarios=4)
    plain = MasterModel(inst, [2] * 4)
    with_cuts = MasterModel(inst, [2] * 4)
    with_cuts.add_cuts(initial_cuts(inst, greedy_heuristic(inst)[0]))
    assert with_cuts.solve().objective >= plain.solve().objective


def test_oracle_examples(figure1, figure3):
    assert brute_force_oracle(figure1) == ([0], Fraction(11, 3))
    assert brute_force_oracle(figure1.with_budget(0)) == ([], eval_objective(figure1))
    best, value = brute_force_oracle(figure3)
    assert value == min(ref.objective(figure3, s) for s in ref.feasible_subsets(figure3))
    assert eval_objective(figure3, {1, 2, 3}) == 3 >= value


def test_oracle_cap(figure1):
    with pytest.raises(InstanceError):
        brute_force_oracle(figure1.with_budget(4), cap=3)


@pytest.mark.parametrize("setting", SETTINGS)
def test_figure1_every_setting(figure1, setting):
    report = branch_and_benders_cut(figure1, setting)
    assert report.blocking == (0,)
    assert report.UB == Fraction(11, 3)
    if setting != "g":
        assert report.optimal and report.LB == pytest.approx(11 / 3)


def test_zero_budget_no_branching(figure1):
    report = branch_and_benders_cut(figure1.with_budget(0), "i")
    assert report.blocking == () and report.UB == eval_objective(figure1)
    assert report.nBB == 1


def test_time_limit_reported():
    inst = random_instance(11, n=40, arcs=160, labels=8, scenarios=6, budget=3)
    report = branch_and_benders_cut(inst, SolverSettings.from_name("i", time_limit=0.0))
    assert not report.optimal


def test_greedy_row_has_empty_bounds(figure1):
    row = branch_and_benders_cut(figure1, "g").row()
    assert row["LB"] == row["gap"] == row["LB0"] == ""


def test_chain_root_bounds(chain3):
    assert root_bound(chain3, "N") == pytest.approx(1.5, abs=1e-9)
    assert root_bound(chain3, "P") == pytest.approx(2.0, abs=1e-9)
    assert root_bound(chain3, "H") == pytest.approx(2.0, abs=1e-9)


@settings(max_examples=12, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_root_bound_equals_abf_relaxation(seed):
    inst = random_instance(seed, n=12, arcs=35, labels=4, scenarios=2, budget=1)
    assert root_bound(inst, "N") == pytest.approx(abf_lp_bound(inst), abs=1e-6)


@settings(max_examples=15, deadline=None)
@given(seed=st.integers(0, 10**6), budget=st.integers(0, 3))
def test_every_setting_matches_oracle(seed, budget):
    inst = random_instance(seed, n=15, arcs=45, labels=6, scenarios=3, budget=budget)
    _, best = brute_force_oracle(inst)
    for setting in EXACT:
        report = branch_and_benders_cut(inst, setting)
        assert report.UB == best, setting
        assert report.UB == eval_objective(inst, report.blocking)
        assert report.optimal
        assert report.LB <= float(report.UB) + 1e-9


@settings(max_examples=10, deadline=None)
@given(seed=st.integers(0, 10**6))
def test_bound_trajectory_monotone(seed):
    inst = random_instance(seed, n=25, arcs=90, labels=7, scenarios=4, budget=2)
    report = branch_and_benders_cut(inst, "i+sf")
    lbs = [lb for lb, _ in report.history]
    ubs = [float(ub) for _, ub in report.history if ub is not None]
    assert all(b >= a - 1e-9 for a, b in zip(lbs, lbs[1:]))
    assert all(b <= a + 1e-12 for a, b in zip(ubs, ubs[1:]))
    assert report.gap >= 0


def test_nonunit_costs():
    inst = random_instance(8, n=18, arcs=60, labels=6, scenarios=3, budget=3,
                           costs=[math.inf, 2.0, 1.0, 1.5, 4.0, 0.5])
    _, best = brute_force_oracle(inst)
    for setting in ("i", "i+sfp"):
        report = branch_and_benders_cut(inst, setting)
        assert report.UB == best
        assert inst.cost_of(report.blocking) <= 3
