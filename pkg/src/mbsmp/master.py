"""Benders master problem and branch-and-Benders-cut driver.

The master keeps one blocking variable per label and one spread variable
``theta_w`` per scenario, and minimizes

    (1/|scenarios|) * sum_w (|S_w| + theta_w)

where ``S_w`` is the scenario's source set: the seeds, or the extended
seeds when that option is on. Every cut bounds ``theta_w`` from below by
the number of reached nodes outside ``S_w``, so both conventions share a
single cut format.
"""
from __future__ import annotations

import heapq
import itertools
import logging
import math
import time
from dataclasses import dataclass, field, replace
from fractions import Fraction
from typing import Sequence

import numpy as np

from .graph import (Instance, InstanceError, eval_objective, extended_seed_sets,
                    pure_label_path_closure, scenario_spreads)
from .separation import (BendersCut, VIOLATION_TOL, cut_sampling, default_eps,
                         separate_combinatorial, separate_lp_abf)
from .simplex import INFEASIBLE, OPTIMAL, BoundedSimplex, SimplexError, linprog

log = logging.getLogger(__name__)

SETTINGS = ("lp", "i", "i+", "i+s", "i+sf", "i+sfp", "i+sfh", "g")
INT_TOL = 1e-6
REL_GAP_TOL = 1e-6
FRACTIONAL_ROUNDS = 20


@dataclass(frozen=True)
class SolverSettings:
    setting: str = "i+sfp"
    tau: float = 1.0
    lift: str = "N"
    fractional_separation: bool = False
    extended_seeds: bool = False
    greedy_start: bool = False
    initial_cuts: bool = False
    lp_separation: bool = False
    time_limit: float = 3600.0
    fractional_rounds: int = FRACTIONAL_ROUNDS
    eps: float | None = None

    @classmethod
    def from_name(cls, name: str, tau: float | None = None,
                  time_limit: float = 3600.0, **overrides) -> "SolverSettings":
        name = name.lower()
        if name not in SETTINGS:
            raise ValueError(f"unknown setting {name!r}; choose from {', '.join(SETTINGS)}")
        enhanced = name.startswith("i+")
        sampled = name.startswith("i+s")
        opts = dict(
            setting=name,
            tau=(0.2 if sampled else 1.0) if tau is None else tau,
            lift={"i+sfp": "P", "i+sfh": "H"}.get(name, "N"),
            fractional_separation=name.startswith("i+sf"),
            extended_seeds=enhanced,
            greedy_start=enhanced,
            initial_cuts=enhanced,
            lp_separation=name == "lp",
            time_limit=time_limit,
        )
        opts.update(overrides)
        return cls(**opts)


@dataclass
class SolveReport:
    instance: str
    setting: str
    UB: Fraction | None
    LB: float | None
    LB0: float | None
    nBB: int = 0
    nIntCut: int = 0
    nFrCut: int = 0
    time: float = 0.0
    blocking: tuple = ()
    optimal: bool = False
    cuts: list = field(default_factory=list, repr=False)
    history: list = field(default_factory=list, repr=False)

    @property
    def gap(self) -> float | None:
        if self.UB is None or self.LB is None:
            return None
        ub = float(self.UB)
        if ub <= 0:
            return 0.0
        return max(0.0, 100.0 * (ub - self.LB) / ub)

    def row(self) -> dict:
        def fmt(v, digits=6):
            if v is None:
                return ""
            return f"{float(v):.{digits}f}"
        gap = self.gap
        return {
            "instance": self.instance,
            "setting": self.setting,
            "t_s": f"{self.time:.3f}",
            "UB": fmt(self.UB),
            "LB": fmt(self.LB),
            "gap": "" if gap is None else f"{gap:.4f}",
            "LB0": fmt(self.LB0),
            "nBB": str(self.nBB),
            "nIntCut": str(self.nIntCut),
            "nFrCut": str(self.nFrCut),
            "opt": str(int(self.optimal)),
        }


@dataclass
class LpSolution:
    status: str
    x: np.ndarray | None
    theta: np.ndarray | None
    objective: float


class MasterModel:
    """LP relaxation of the master, grown by cuts and restricted by branching."""

    def __init__(self, instance: Instance, source_sizes: Sequence[int],
                 fixed_zero: Sequence[int] = ()):
        self.instance = instance
        nk, nw = instance.label_count, instance.scenario_count
        self.nk, self.nw = nk, nw
        self.offset = sum(source_sizes) / nw
        c = np.concatenate([np.zeros(nk), np.full(nw, 1.0 / nw)])
        costs = np.array([0.0 if math.isinf(v) else v for v in instance.costs])
        ub = np.concatenate([np.ones(nk), np.full(nw, np.inf)])
        self.fixed_zero = sorted(set(fixed_zero) | set(instance.unblockable))
        for k in self.fixed_zero:
            ub[k] = 0.0
        self.base_ub = ub.copy()
        budget_row = np.concatenate([costs, np.zeros(nw)]).reshape(1, -1)
        self.lp = BoundedSimplex(c, budget_row, [instance.budget], np.zeros(nk + nw), ub)
        self.cuts: list[BendersCut] = []
        self._keys: set = set()
        # cut pool as dense rows; only ``active`` ones are LP rows 1.. in order
        self._pool = np.zeros((0, nk + nw))
        self._pool_rhs = np.zeros(0)
        self.active: list[int] = []
        self.row_limit = 2 * (nk + nw)

    def add_cuts(self, cuts: Sequence[BendersCut]) -> list[BendersCut]:
        rows, rhs, added = [], [], []
        for cut in cuts:
            key = cut.key()
            if key in self._keys:
                continue
            self._keys.add(key)
            row = np.zeros(self.nk + self.nw)
            row[:self.nk] = -np.asarray(cut.coefficients, dtype=float)
            row[self.nk + cut.scenario] = -1.0
            rows.append(row)
            rhs.append(-float(cut.constant))
            self.cuts.append(cut)
            added.append(cut)
        if rows:
            start = len(self._pool_rhs)
            self._pool = np.vstack([self._pool, rows])
            self._pool_rhs = np.concatenate([self._pool_rhs, rhs])
            self._activate(range(start, start + len(rows)))
        return added

    def _activate(self, idx):
        idx = list(idx)
        self.lp.add_rows(self._pool[idx], self._pool_rhs[idx])
        self.active.extend(idx)

    def _purge(self, x):
        """Drop slack cut rows once the LP grows past ``row_limit``."""
        if len(self.active) <= self.row_limit:
            return
        slack = self.lp.b[1:] - self.lp.A[1:] @ x
        loose = np.flatnonzero(slack > 1e-7)
        if len(loose) == 0:
            return
        self.lp.remove_rows(loose + 1)
        drop = set(loose.tolist())
        self.active = [p for i, p in enumerate(self.active) if i not in drop]

    def get_basis(self):
        return (tuple(self.active),) + tuple(self.lp.get_basis())

    def set_basis(self, token):
        rows, basis, state = token
        # a saved basis stays valid only if rows were appended since
        if tuple(self.active[:len(rows)]) == rows:
            self.lp.set_basis(basis, state)

    def set_fixings(self, fixings: dict):
        for k in range(self.nk):
            if k in fixings:
                self.lp.set_bounds(k, float(fixings[k]), float(fixings[k]))
            else:
                self.lp.set_bounds(k, 0.0, self.base_ub[k])

    def solve(self) -> LpSolution:
        return solve_lp_master(self)


def solve_lp_master(model: MasterModel) -> LpSolution:
    """Optimum over the whole cut pool, keeping only a working set in the LP."""
    while True:
        res = model.lp.solve()
        if res.status != OPTIMAL:
            return LpSolution(res.status, None, None, math.inf)
        inactive = np.ones(len(model._pool_rhs), dtype=bool)
        inactive[model.active] = False
        idx = np.flatnonzero(inactive)
        if len(idx) == 0:
            break
        viol = model._pool[idx] @ res.x - model._pool_rhs[idx] > 1e-9
        if not viol.any():
            break
        model._activate(idx[viol])
    model._purge(res.x)
    x = np.clip(res.x[:model.nk], 0.0, 1.0)
    theta = np.maximum(res.x[model.nk:], 0.0)
    return LpSolution(OPTIMAL, x, theta, res.objective + model.offset)


def greedy_heuristic(instance: Instance, fixed_zero: Sequence[int] = ()) -> tuple[list, Fraction]:
    """Repeatedly block the affordable label with the largest spread reduction."""
    blocked: list[int] = []
    spent = 0.0
    forbidden = set(fixed_zero) | set(instance.unblockable)
    total = sum(scenario_spreads(instance, blocked))
    while True:
        best, best_total = None, None
        for k in range(instance.label_count):
            if k in forbidden or k in blocked:
                continue
            if spent + instance.costs[k] > instance.budget + 1e-9:
                continue
            t = sum(scenario_spreads(instance, blocked + [k]))
            if best is None or t < best_total:
                best, best_total = k, t
        if best is None:
            break
        blocked.append(best)
        spent += instance.costs[best]
        total = best_total
    return sorted(blocked), Fraction(total, instance.scenario_count)


def initial_cuts(instance: Instance, blocking: Sequence[int], lift: str = "N",
                 sources: Sequence | None = None, eps: float | None = None) -> list[BendersCut]:
    """One cut per scenario at the given (binary) blocking."""
    x = [0.0] * instance.label_count
    for k in blocking:
        x[k] = 1.0
    out = []
    for w in range(instance.scenario_count):
        src = None if sources is None else sources[w]
        cut, _ = separate_combinatorial(instance, w, x, None, lift, eps, src)
        out.append(cut)
    return out


def brute_force_oracle(instance: Instance, cap: int = 10**6) -> tuple[list, Fraction]:
    """Enumerate every affordable label subset; lexicographically smallest argmin."""
    labels = [k for k in instance.blockable if instance.costs[k] <= instance.budget + 1e-9]
    best, best_val, seen = None, None, 0
    for size in range(len(labels) + 1):
        for combo in itertools.combinations(labels, size):
            if instance.cost_of(combo) > instance.budget + 1e-9:
                continue
            seen += 1
            if seen > cap:
                raise InstanceError(f"more than {cap} feasible subsets; raise the cap")
            val = eval_objective(instance, combo)
            if best_val is None or val < best_val or (val == best_val and list(combo) < best):
                best, best_val = list(combo), val
    return best, best_val


@dataclass(order=True)
class _Node:
    bound: float
    depth_key: int
    seq: int
    fixings: dict = field(compare=False)
    basis: tuple | None = field(compare=False, default=None)


class BranchAndBendersCut:
    """One solve of an instance under one setting; see :func:`branch_and_benders_cut`."""

    def __init__(self, instance: Instance, settings: SolverSettings,
                 cut_trace: list | None = None):
        self.instance = instance
        self.settings = settings
        self.trace = cut_trace
        nw = instance.scenario_count
        if settings.extended_seeds:
            self.sources = [sorted(s) for s in extended_seed_sets(instance)]
        else:
            self.sources = [list(instance.seeds)] * nw
        self.sep_instance = (pure_label_path_closure(instance)
                             if settings.lift == "H" else instance)
        self.fixed_zero = [k for k in instance.blockable
                           if instance.costs[k] > instance.budget + 1e-9]
        self.model = MasterModel(instance, [len(s) for s in self.sources], self.fixed_zero)
        self.eps = settings.eps if settings.eps is not None else default_eps(instance.n)
        self.ub: Fraction | None = None
        self.incumbent: tuple = ()
        self.n_int = self.n_fr = self.n_bb = 0

    # separation ---------------------------------------------------------

    def _separate(self, x, theta, tau) -> list[BendersCut]:
        inst, st = self.instance, self.settings
        if st.lp_separation:
            def sep(w):
                return separate_lp_abf(inst, w, x, theta[w], self.sources[w])
            cuts = cut_sampling(inst, theta, x, tau=tau, separator=sep, trace=self.trace)
        else:
            cuts = cut_sampling(self.sep_instance, theta, x, st.lift, tau,
                                self.sources, self.eps, trace=self.trace)
        return self.model.add_cuts(cuts)

    def _offer(self, blocking):
        blocking = tuple(sorted(blocking))
        val = eval_objective(self.instance, blocking)
        if self.ub is None or val < self.ub:
            self.ub, self.incumbent = val, blocking
            return True
        return False

    def _prune_value(self):
        if self.ub is None:
            return math.inf
        ub = float(self.ub)
        return ub - REL_GAP_TOL * max(ub, 1e-12)

    # node processing -----------------------------------------------------

    def _process(self, fixings: dict, deadline: float):
        """Cut loop at one node. Returns (status, bound, x) with status in
        {'pruned', 'integral', 'branch', 'timeout'}."""
        st = self.settings
        model = self.model
        model.set_fixings(fixings)
        rounds = 0
        while True:
            sol = model.solve()
            if sol.status != OPTIMAL:
                return "pruned", math.inf, None
            if sol.objective >= self._prune_value():
                return "pruned", sol.objective, sol.x
            x = sol.x
            frac = np.abs(x - np.round(x))
            if frac.max(initial=0.0) <= INT_TOL:
                xr = np.round(x)
                blocking = [k for k in range(len(xr)) if xr[k] > 0.5]
                self._offer(blocking)
                cuts = self._separate(xr.tolist(), sol.theta.tolist(), st.tau)
                self.n_int += len(cuts)
                if cuts:
                    if time.monotonic() > deadline:
                        return "timeout", sol.objective, x
                    continue
                return "integral", sol.objective, x
            if st.fractional_separation and rounds < st.fractional_rounds:
                cuts = self._separate(x.tolist(), sol.theta.tolist(), st.tau)
                self.n_fr += len(cuts)
                if cuts:
                    rounds += 1
                    if time.monotonic() > deadline:
                        return "timeout", sol.objective, x
                    continue
            return "branch", sol.objective, x

    def run(self) -> SolveReport:
        st, inst = self.settings, self.instance
        start = time.monotonic()
        deadline = start + st.time_limit
        if st.greedy_start:
            blocking, _ = greedy_heuristic(inst, self.fixed_zero)
            self._offer(blocking)
            if st.initial_cuts:
                cuts = initial_cuts(self.sep_instance, blocking, st.lift, self.sources, self.eps)
                self.model.add_cuts(cuts)
        counter = itertools.count()
        heap: list[_Node] = [_Node(-math.inf, 0, next(counter), {})]
        dive: list[_Node] = []
        lb0 = None
        history = []
        timed_out = False
        while heap or dive:
            open_bound = min(n.bound for n in itertools.chain(heap, dive))
            if self.ub is not None and open_bound >= self._prune_value():
                heap.clear()
                dive.clear()
                break
            if time.monotonic() > deadline:
                timed_out = True
                break
            from_dive = bool(dive)
            node = dive.pop() if dive else heapq.heappop(heap)
            if node.basis is not None:
                self.model.set_basis(node.basis)
            self.n_bb += 1
            ub_before = self.ub
            status, bound, x = self._process(node.fixings, deadline)
            bound = max(bound, node.bound)
            if lb0 is None:
                lb0 = bound
            if status == "timeout":
                heapq.heappush(heap, replace(node, bound=bound, basis=None))
                timed_out = True
                break
            if status == "branch":
                frac = np.abs(x - np.round(x))
                k = int(np.argmax(frac))  # smallest index among ties
                basis = self.model.get_basis()
                depth = node.depth_key - 1
                down = _Node(bound, depth, next(counter), {**node.fixings, k: 0}, basis)
                up = _Node(bound, depth, next(counter), {**node.fixings, k: 1}, basis)
                if ub_before != self.ub or from_dive:
                    heapq.heappush(heap, down)
                    dive.append(up)
                else:
                    heapq.heappush(heap, down)
                    heapq.heappush(heap, up)
            history.append((self._global_lb(heap, dive), self.ub))
        ub = None if self.ub is None else float(self.ub)
        if timed_out:
            lb = self._global_lb(heap, dive)
        else:
            lb = ub if ub is not None else -math.inf
        if ub is not None:
            lb = min(lb, ub)
            lb0 = None if lb0 is None else min(lb0, ub)
        report = SolveReport(
            instance=inst.name, setting=st.setting, UB=self.ub, LB=lb, LB0=lb0,
            nBB=self.n_bb, nIntCut=self.n_int, nFrCut=self.n_fr,
            time=time.monotonic() - start, blocking=self.incumbent)
        gap = report.gap
        report.optimal = (not timed_out) and gap is not None and gap <= 100 * REL_GAP_TOL
        report.cuts = list(self.model.cuts)
        report.history = history
        return report

    def _global_lb(self, heap, dive):
        bounds = [n.bound for n in itertools.chain(heap, dive)]
        ub = math.inf if self.ub is None else float(self.ub)
        return min(bounds + [ub])


def branch_and_benders_cut(instance: Instance, settings: SolverSettings | str = "i+sfp",
                           cut_trace: list | None = None) -> SolveReport:
    if isinstance(settings, str):
        settings = SolverSettings.from_name(settings)
    if settings.setting == "g":
        return greedy_report(instance)
    return BranchAndBendersCut(instance, settings, cut_trace).run()


def greedy_report(instance: Instance) -> SolveReport:
    start = time.monotonic()
    fixed = [k for k in instance.blockable if instance.costs[k] > instance.budget + 1e-9]
    blocking, value = greedy_heuristic(instance, fixed)
    return SolveReport(instance.name, "g", value, None, None,
                       time=time.monotonic() - start, blocking=tuple(blocking))


def root_bound(instance: Instance, lift: str = "N", extended: bool = False,
               tau: float = 1.0, max_rounds: int = 10000, eps: float | None = None,
               lp_separation: bool = False) -> float:
    """Converged cutting-plane bound of the master LP relaxation.

    No presolve and no cap on rounds: separate at every LP optimum until no
    cut is violated.
    """
    sources = ([sorted(s) for s in extended_seed_sets(instance)] if extended
               else [list(instance.seeds)] * instance.scenario_count)
    sep_instance = pure_label_path_closure(instance) if lift == "H" else instance
    model = MasterModel(instance, [len(s) for s in sources])
    for _ in range(max_rounds):
        sol = model.solve()
        if sol.status != OPTIMAL:
            raise SimplexError("master relaxation infeasible")
        x, theta = sol.x.tolist(), sol.theta.tolist()
        if lp_separation:
            cuts = cut_sampling(instance, theta, x, tau=tau, separator=lambda w: separate_lp_abf(
                instance, w, x, theta[w], sources[w]))
        else:
            cuts = cut_sampling(sep_instance, theta, x, lift, tau, sources, eps)
        if not model.add_cuts(cuts):
            return sol.objective
    raise SimplexError("cutting-plane loop did not converge")


def abf_lp_bound(instance: Instance) -> float:
    """LP relaxation of the full arc-based model, solved directly."""
    n, nk, nw = instance.n, instance.label_count, instance.scenario_count
    g = instance.graph
    nvar = nk + n * nw
    c = np.zeros(nvar)
    c[nk:] = 1.0 / nw
    rows, rhs = [], []
    budget = np.zeros(nvar)
    budget[:nk] = [0.0 if math.isinf(v) else v for v in instance.costs]
    rows.append(budget)
    rhs.append(instance.budget)
    for w in range(nw):
        base = nk + w * n
        for a in instance.scenarios[w].tolist():
            i, j, k = int(g.tails[a]), int(g.heads[a]), int(g.labels[a])
            row = np.zeros(nvar)
            row[base + i] += 1.0
            row[base + j] -= 1.0
            row[k] -= 1.0
            rows.append(row)
            rhs.append(0.0)
    lb = np.zeros(nvar)
    ub = np.concatenate([np.ones(nk), np.full(n * nw, np.inf)])
    for k in instance.unblockable:
        ub[k] = 0.0
    for w in range(nw):
        for i in instance.seeds:
            lb[nk + w * n + i] = 1.0
    res = linprog(c, np.array(rows), np.array(rhs), lb, ub)
    if res.status != OPTIMAL:
        raise SimplexError(f"ABF relaxation ended with status {res.status}")
    return res.objective
