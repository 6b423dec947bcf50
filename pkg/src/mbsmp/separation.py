"""Benders optimality-cut separation for one scenario.

A cut reads ``theta_w >= constant - sum_k coefficients[k] * x_k`` and
underestimates the number of nodes outside the scenario's source set that
the contagion reaches under blocking ``x``.

The combinatorial separator is a Dijkstra search from the sources on the
live arcs, with arc length ``max(x_k, eps)``. Nodes at distance < 1 are
reachable; their shortest-path tree (the activation forest) yields the cut.
Lift ``N`` counts every label occurrence on an activation path, ``P``
counts each label at most once per path, and ``H`` additionally treats an
arc as free when its label already occurs on the path to its tail.
"""
from __future__ import annotations

import heapq
import math
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from .graph import Instance
from .simplex import OPTIMAL, SimplexError, linprog

LIFTS = ("N", "P", "H")
VIOLATION_TOL = 1e-6


def default_eps(n: int) -> float:
    # keeps a path of up to n zero-cost arcs strictly shorter than 1
    return min(1e-6, 1.0 / (2 * (n + 1)))


@dataclass(frozen=True)
class BendersCut:
    scenario: int
    constant: float
    coefficients: tuple
    lift: str = "N"
    extended: bool = False

    def rhs(self, x: Sequence[float]) -> float:
        return self.constant - sum(c * x[k] for k, c in enumerate(self.coefficients) if c)

    def violation(self, theta: float, x: Sequence[float]) -> float:
        return self.rhs(x) - theta

    def is_violated(self, theta: float, x: Sequence[float], tol: float = VIOLATION_TOL) -> bool:
        return self.violation(theta, x) > tol

    def key(self):
        return (self.scenario, round(self.constant, 9),
                tuple(round(c, 9) for c in self.coefficients))


@dataclass
class ActivationForest:
    """Shortest-path forest of the reachable nodes of one scenario."""

    sources: frozenset
    order: list                       # reached nodes, in the order they left the queue
    distance: dict                    # node -> search distance (< 1)
    pred_arc: dict                    # non-source node -> arc index of its predecessor arc
    pred_node: dict
    path_labels: dict                 # node -> frozenset of labels on its activation path
    arc_label: dict = field(default_factory=dict)

    def subtree_sizes(self) -> dict:
        size = dict.fromkeys(self.order, 1)
        for v in reversed(self.order):
            u = self.pred_node.get(v)
            if u is not None:
                size[u] += size[v]
        return size

    def path_arcs(self, v) -> list:
        arcs = []
        while v in self.pred_arc:
            arcs.append(self.pred_arc[v])
            v = self.pred_node[v]
        return arcs[::-1]

    def true_length(self, v, x, arc_label=None) -> float:
        arc_label = arc_label or self.arc_label
        return sum(max(x[arc_label[a]], 0.0) for a in self.path_arcs(v))


def activation_forest(instance: Instance, w: int, x: Sequence[float], lift: str = "N",
                      eps: float | None = None, sources: Iterable[int] | None = None,
                      early_exit: bool = True) -> ActivationForest:
    if lift not in LIFTS:
        raise ValueError(f"unknown lift mode {lift!r}")
    adj = instance.adjacency(w)
    indptr, heads, labels, arc_ids = adj.indptr, adj.heads, adj.labels, adj.arcs
    if eps is None:
        eps = default_eps(instance.n)
    length = [max(float(v), eps) for v in x]
    sources = frozenset(instance.seeds if sources is None else sources)
    heuristic = lift == "H"

    empty = frozenset()
    dist = {i: 0.0 for i in sources}
    plabels = {i: empty for i in sources}
    pred_arc, pred_node, arc_label = {}, {}, {}
    reached = set()
    order = []
    heap = [(0.0, i) for i in sorted(sources)]
    heapq.heapify(heap)
    while heap:
        d_u, u = heapq.heappop(heap)
        if u in reached or d_u > dist[u]:
            continue
        if d_u >= 1.0:
            if early_exit:
                break
            continue
        reached.add(u)
        order.append(u)
        lab_u = plabels[u]
        for a in range(indptr[u], indptr[u + 1]):
            v = heads[a]
            if v in reached:
                continue
            k = labels[a]
            if heuristic and k in lab_u:
                d_v = d_u
            else:
                d_v = d_u + length[k]
            if d_v < dist.get(v, 1.0):
                dist[v] = d_v
                pred_arc[v] = arc_ids[a]
                pred_node[v] = u
                arc_label[arc_ids[a]] = k
                plabels[v] = lab_u if k in lab_u else lab_u | {k}
                heapq.heappush(heap, (d_v, v))
    keep = set(order)
    return ActivationForest(
        sources=sources, order=order,
        distance={v: dist[v] for v in order},
        pred_arc={v: a for v, a in pred_arc.items() if v in keep},
        pred_node={v: u for v, u in pred_node.items() if v in keep},
        path_labels={v: plabels[v] for v in order},
        arc_label=arc_label)


def cut_from_forest(instance: Instance, w: int, forest: ActivationForest, lift: str,
                    extended: bool = False) -> BendersCut:
    coef = [0] * instance.label_count
    constant = 0
    if lift == "N":
        size = forest.subtree_sizes()
        for v in forest.order:
            if v in forest.sources:
                continue
            constant += 1
            coef[forest.arc_label[forest.pred_arc[v]]] += size[v]
    else:
        for v in forest.order:
            if v in forest.sources:
                continue
            constant += 1
            for k in forest.path_labels[v]:
                coef[k] += 1
    for k in instance.unblockable:
        coef[k] = 0
    return BendersCut(w, constant, tuple(coef), lift, extended)


def separate_combinatorial(instance: Instance, w: int, x: Sequence[float],
                           theta: float | None = None, lift: str = "N",
                           eps: float | None = None, sources: Iterable[int] | None = None,
                           early_exit: bool = True) -> tuple[BendersCut, bool]:
    """Shortest-path separation; returns the cut and whether it is violated.

    For lift ``H`` pass an instance already run through
    :func:`mbsmp.graph.pure_label_path_closure`.
    """
    extended = sources is not None and frozenset(sources) != frozenset(instance.seeds)
    forest = activation_forest(instance, w, x, lift, eps, sources, early_exit)
    cut = cut_from_forest(instance, w, forest, lift, extended)
    violated = theta is not None and cut.is_violated(theta, x)
    return cut, violated


@dataclass
class DualArcSolution:
    """Dual of the arc-based scenario subproblem.

    ``alpha`` maps each source to the number of nodes whose activation path
    starts there (itself included); ``beta`` maps each live arc to the
    number of nodes whose activation path uses it (zero if absent).
    """

    scenario: int
    alpha: dict
    beta: dict
    objective: float

    def beta_by_label(self, instance: Instance) -> list:
        out = [0] * instance.label_count
        labels = instance.graph.labels
        for a, b in self.beta.items():
            out[int(labels[a])] += b
        return out

    def constraint_slacks(self, instance: Instance) -> dict:
        """Right-hand side minus left-hand side for every node row (>= 0 iff feasible)."""
        g = instance.graph
        lhs = dict.fromkeys(range(instance.n), 0.0)
        for a in instance.scenarios[self.scenario].tolist():
            b = self.beta.get(a, 0)
            lhs[int(g.tails[a])] -= b
            lhs[int(g.heads[a])] += b
        for i, al in self.alpha.items():
            lhs[i] += al
        return {i: 1.0 - v for i, v in lhs.items()}


def construct_dual_abf(instance: Instance, w: int, x: Sequence[float],
                       sources: Iterable[int] | None = None,
                       eps: float | None = None) -> DualArcSolution:
    forest = activation_forest(instance, w, x, "N", eps, sources)
    size = forest.subtree_sizes()
    alpha = {i: 0 for i in forest.sources}
    for i in forest.order:
        if i in forest.sources:
            alpha[i] = size[i]
    beta = {a: 0 for a in instance.scenarios[w].tolist()}
    for v, a in forest.pred_arc.items():
        beta[a] = size[v]
    labels = instance.graph.labels
    objective = sum(alpha.values()) - sum(
        b * max(float(x[int(labels[a])]), 0.0) for a, b in beta.items() if b)
    return DualArcSolution(w, alpha, beta, objective)


def solve_dual_abf_lp(instance: Instance, w: int, x: Sequence[float],
                      sources: Iterable[int] | None = None):
    """Solve the arc-based dual subproblem as an LP.

    Returns ``(objective, alpha, beta)`` with alpha keyed by source and beta
    keyed by live arc index.
    """
    g = instance.graph
    sources = sorted(set(instance.seeds if sources is None else sources))
    live = instance.scenarios[w].tolist()
    ns, na, n = len(sources), len(live), instance.n
    # columns: alpha (one per source), beta (one per live arc); minimize the negation
    c = np.zeros(ns + na)
    c[:ns] = -1.0
    for t, a in enumerate(live):
        c[ns + t] = max(float(x[int(g.labels[a])]), 0.0)
    A = np.zeros((n, ns + na))
    for s, i in enumerate(sources):
        A[i, s] = 1.0
    for t, a in enumerate(live):
        A[int(g.tails[a]), ns + t] -= 1.0
        A[int(g.heads[a]), ns + t] += 1.0
    res = linprog(c, A, np.ones(n))
    if res.status != OPTIMAL:
        raise SimplexError(f"dual subproblem LP ended with status {res.status}")
    alpha = {i: float(res.x[s]) for s, i in enumerate(sources)}
    beta = {a: float(res.x[ns + t]) for t, a in enumerate(live)}
    return -res.objective, alpha, beta


def _clean(v: float) -> float:
    r = round(v)
    return float(r) if abs(v - r) <= 1e-7 else float(v)


def separate_lp_abf(instance: Instance, w: int, x: Sequence[float],
                    theta: float | None = None, sources: Iterable[int] | None = None
                    ) -> tuple[BendersCut, bool]:
    """LP-based separation of the arc-based cut, in source-excluded form."""
    src = sorted(set(instance.seeds if sources is None else sources))
    _, alpha, beta = solve_dual_abf_lp(instance, w, x, src)
    coef = [0.0] * instance.label_count
    labels = instance.graph.labels
    for a, b in beta.items():
        coef[int(labels[a])] += b
    for k in instance.unblockable:
        coef[k] = 0.0
    constant = _clean(sum(alpha.values()) - len(src))
    cut = BendersCut(w, constant, tuple(_clean(c) for c in coef), "N",
                     extended=frozenset(src) != frozenset(instance.seeds))
    violated = theta is not None and cut.is_violated(theta, x)
    return cut, violated


Separator = Callable[[int], tuple]


def cut_sampling(instance: Instance, theta: Sequence[float], x: Sequence[float],
                 lift: str = "N", tau: float = 1.0, sources: Sequence | None = None,
                 eps: float | None = None, separator: Separator | None = None,
                 trace: list | None = None) -> list[BendersCut]:
    """Collect violated cuts, scanning scenarios by nondecreasing ``theta``.

    Stops once ``ceil(tau * |scenarios|)`` violated cuts are found. A custom
    ``separator(w) -> (cut, violated)`` replaces the combinatorial one.
    """
    if not 0 < tau <= 1:
        raise ValueError("tau must lie in (0, 1]")
    count = instance.scenario_count
    wanted = max(1, math.ceil(tau * count - 1e-9))
    if separator is None:
        def separator(w):
            src = None if sources is None else sources[w]
            return separate_combinatorial(instance, w, x, theta[w], lift, eps, src)
    cuts = []
    for w in sorted(range(count), key=lambda w: (theta[w], w)):
        cut, violated = separator(w)
        if trace is not None:
            trace.append((cut, violated))
        if violated:
            cuts.append(cut)
            if len(cuts) >= wanted:
                break
    return cuts


def format_cut(cut: BendersCut, violated: bool) -> str:
    def num(v):
        return str(int(v)) if float(v).is_integer() else repr(float(v))
    terms = " ".join(f"{k}:{num(c)}" for k, c in enumerate(cut.coefficients) if c)
    parts = [str(cut.scenario), num(cut.constant)]
    if terms:
        parts.append(terms)
    parts += [f"lift={cut.lift}", f"violated={int(bool(violated))}"]
    return " ".join(parts)
