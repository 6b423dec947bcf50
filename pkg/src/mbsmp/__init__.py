"""Blocking contact labels to minimize expected independent-cascade spread."""
from .estimator import SpreadMinimizer, check_blocking, check_instance
from .graph import (BudgetError, Instance, InstanceError, LabeledDigraph, ScenarioSet,
                    eval_objective, eval_spread, reach_set)
from .io import ParseError, load_instance, save_instance
from .master import (SETTINGS, SolverSettings, SolveReport, branch_and_benders_cut,
                     brute_force_oracle, greedy_heuristic)

__version__ = "0.1.0"
