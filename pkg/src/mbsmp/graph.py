"""Labeled multigraphs, live-arc scenarios and spread evaluation."""
from __future__ import annotations

import math
from collections import deque
from dataclasses import dataclass, field
from fractions import Fraction
from functools import cached_property
from typing import Iterable, Sequence

import numpy as np


class InstanceError(ValueError):
    pass


class BudgetError(InstanceError):
    pass


@dataclass(frozen=True, eq=False)
class LabeledDigraph:
    """Directed multigraph whose arcs carry one label each.

    Parallel arcs between the same ordered pair are allowed as long as
    their labels differ.
    """

    node_count: int
    tails: np.ndarray
    heads: np.ndarray
    labels: np.ndarray
    label_count: int

    def __post_init__(self):
        tails = np.asarray(self.tails, dtype=np.int64).reshape(-1)
        heads = np.asarray(self.heads, dtype=np.int64).reshape(-1)
        labels = np.asarray(self.labels, dtype=np.int64).reshape(-1)
        if not (len(tails) == len(heads) == len(labels)):
            raise InstanceError("tails, heads and labels must have equal length")
        if self.node_count < 0 or self.label_count < 0:
            raise InstanceError("node and label counts must be nonnegative")
        n, nk = self.node_count, self.label_count
        if len(tails):
            if tails.min() < 0 or tails.max() >= n or heads.min() < 0 or heads.max() >= n:
                raise InstanceError("arc endpoint out of range")
            if labels.min() < 0 or labels.max() >= nk:
                raise InstanceError("arc label out of range")
        for arr in (tails, heads, labels):
            arr.setflags(write=False)
        object.__setattr__(self, "tails", tails)
        object.__setattr__(self, "heads", heads)
        object.__setattr__(self, "labels", labels)
        if len(self.arc_index) != len(tails):
            raise InstanceError("duplicate arc with identical (tail, head, label)")

    @classmethod
    def from_arcs(cls, node_count: int, arcs: Iterable[tuple[int, int, int]],
                  label_count: int | None = None) -> "LabeledDigraph":
        arcs = list(arcs)
        if label_count is None:
            label_count = 1 + max((a[2] for a in arcs), default=-1)
        t = [a[0] for a in arcs]
        h = [a[1] for a in arcs]
        lab = [a[2] for a in arcs]
        return cls(node_count, np.array(t, dtype=np.int64), np.array(h, dtype=np.int64),
                   np.array(lab, dtype=np.int64), label_count)

    @classmethod
    def from_undirected(cls, node_count: int, edges: Iterable[tuple[int, int, int]],
                        label_count: int | None = None) -> "LabeledDigraph":
        """Each labeled edge becomes two opposite arcs with the same label."""
        arcs = []
        for u, v, k in edges:
            arcs.append((u, v, k))
            arcs.append((v, u, k))
        return cls.from_arcs(node_count, arcs, label_count)

    @property
    def arc_count(self) -> int:
        return len(self.tails)

    def arc(self, a: int) -> tuple[int, int, int]:
        return int(self.tails[a]), int(self.heads[a]), int(self.labels[a])

    def arcs(self) -> list[tuple[int, int, int]]:
        return list(zip(self.tails.tolist(), self.heads.tolist(), self.labels.tolist()))

    @cached_property
    def arc_index(self) -> dict[tuple[int, int, int], int]:
        return {arc: a for a, arc in enumerate(self.arcs())}

    @cached_property
    def label_arcs(self) -> list[np.ndarray]:
        """Arc indices per label; these sets partition the arc set."""
        order = np.argsort(self.labels, kind="stable")
        bounds = np.searchsorted(self.labels[order], np.arange(self.label_count + 1))
        return [order[bounds[k]:bounds[k + 1]] for k in range(self.label_count)]

    def __eq__(self, other):
        if not isinstance(other, LabeledDigraph):
            return NotImplemented
        return (self.node_count == other.node_count and self.label_count == other.label_count
                and np.array_equal(self.tails, other.tails)
                and np.array_equal(self.heads, other.heads)
                and np.array_equal(self.labels, other.labels))

    __hash__ = None


@dataclass(frozen=True, eq=False)
class ScenarioSet:
    """Live-arc graphs, stored as sorted arc-index arrays over a base graph."""

    live_arcs: tuple[np.ndarray, ...]

    def __post_init__(self):
        arrs = []
        for live in self.live_arcs:
            arr = np.unique(np.asarray(live, dtype=np.int64).reshape(-1))
            if len(arr) != len(np.asarray(live).reshape(-1)):
                raise InstanceError("arc listed twice in one scenario")
            arr.setflags(write=False)
            arrs.append(arr)
        object.__setattr__(self, "live_arcs", tuple(arrs))

    @property
    def scenario_count(self) -> int:
        return len(self.live_arcs)

    def __len__(self):
        return len(self.live_arcs)

    def __getitem__(self, w):
        return self.live_arcs[w]

    def check_against(self, graph: LabeledDigraph):
        for w, live in enumerate(self.live_arcs):
            if len(live) and (live[0] < 0 or live[-1] >= graph.arc_count):
                raise InstanceError(f"scenario {w} refers to a missing arc")

    def label_arcs(self, graph: LabeledDigraph, w: int, k: int) -> np.ndarray:
        live = self.live_arcs[w]
        return live[graph.labels[live] == k]

    def __eq__(self, other):
        if not isinstance(other, ScenarioSet):
            return NotImplemented
        return len(self) == len(other) and all(
            np.array_equal(a, b) for a, b in zip(self.live_arcs, other.live_arcs))

    __hash__ = None


class _Adjacency:
    """CSR out-adjacency of one live-arc graph, kept as plain lists."""

    __slots__ = ("indptr", "heads", "labels", "arcs")

    def __init__(self, graph: LabeledDigraph, live: np.ndarray):
        tails = graph.tails[live]
        order = np.argsort(tails, kind="stable")
        arcs = live[order]
        self.indptr = np.searchsorted(tails[order], np.arange(graph.node_count + 1)).tolist()
        self.heads = graph.heads[arcs].tolist()
        self.labels = graph.labels[arcs].tolist()
        self.arcs = arcs.tolist()


@dataclass(frozen=True, eq=False)
class Instance:
    graph: LabeledDigraph
    costs: tuple[float, ...]
    budget: float
    seeds: tuple[int, ...]
    scenarios: ScenarioSet
    name: str = field(default="", compare=False)

    def __post_init__(self):
        costs = tuple(float(c) for c in self.costs)
        if len(costs) != self.graph.label_count:
            raise InstanceError("one cost per label required")
        if any(math.isnan(c) or c < 0 for c in costs):
            raise InstanceError("costs must be nonnegative")
        if not self.budget >= 0 or math.isinf(self.budget):
            raise InstanceError("budget must be finite and nonnegative")
        seeds = tuple(sorted(set(int(i) for i in self.seeds)))
        if not seeds:
            raise InstanceError("seed set must be nonempty")
        if seeds[0] < 0 or seeds[-1] >= self.graph.node_count:
            raise InstanceError("seed out of range")
        self.scenarios.check_against(self.graph)
        object.__setattr__(self, "costs", costs)
        object.__setattr__(self, "seeds", seeds)
        object.__setattr__(self, "budget", float(self.budget))

    @property
    def n(self) -> int:
        return self.graph.node_count

    @property
    def label_count(self) -> int:
        return self.graph.label_count

    @property
    def scenario_count(self) -> int:
        return self.scenarios.scenario_count

    @cached_property
    def unblockable(self) -> frozenset[int]:
        return frozenset(k for k, c in enumerate(self.costs) if math.isinf(c))

    @cached_property
    def blockable(self) -> tuple[int, ...]:
        return tuple(k for k in range(self.label_count) if k not in self.unblockable)

    @cached_property
    def _adjacency(self) -> list:
        return [None] * self.scenario_count

    def adjacency(self, w: int) -> _Adjacency:
        if not 0 <= w < self.scenario_count:
            raise IndexError(f"invalid scenario index {w}")
        adj = self._adjacency[w]
        if adj is None:
            adj = self._adjacency[w] = _Adjacency(self.graph, self.scenarios[w])
        return adj

    def cost_of(self, labels: Iterable[int]) -> float:
        return sum(self.costs[k] for k in labels)

    def is_feasible(self, labels: Iterable[int], tol: float = 1e-9) -> bool:
        labels = set(labels)
        if labels & self.unblockable:
            return False
        return self.cost_of(labels) <= self.budget + tol

    def with_budget(self, budget: float) -> "Instance":
        return Instance(self.graph, self.costs, budget, self.seeds, self.scenarios, self.name)

    def with_scenarios(self, scenarios: ScenarioSet) -> "Instance":
        return Instance(self.graph, self.costs, self.budget, self.seeds, scenarios, self.name)

    def __eq__(self, other):
        if not isinstance(other, Instance):
            return NotImplemented
        return (self.graph == other.graph and self.costs == other.costs
                and self.budget == other.budget and self.seeds == other.seeds
                and self.scenarios == other.scenarios)

    __hash__ = None


def _blocked_mask(label_count: int, blocked: Iterable[int]) -> list[bool]:
    mask = [False] * label_count
    for k in blocked:
        if not 0 <= k < label_count:
            raise InstanceError(f"label {k} out of range")
        mask[k] = True
    return mask


def reach_set(instance: Instance, w: int, blocked: Iterable[int] = (),
              sources: Iterable[int] | None = None) -> set[int]:
    """Nodes reachable from the seeds in scenario ``w`` avoiding blocked labels."""
    adj = instance.adjacency(w)
    mask = _blocked_mask(instance.label_count, blocked)
    return _bfs(adj, instance.seeds if sources is None else sources, mask)


def _bfs(adj: _Adjacency, sources, mask) -> set[int]:
    indptr, heads, labels = adj.indptr, adj.heads, adj.labels
    seen = set(sources)
    queue = deque(seen)
    while queue:
        u = queue.popleft()
        for a in range(indptr[u], indptr[u + 1]):
            v = heads[a]
            if v not in seen and not mask[labels[a]]:
                seen.add(v)
                queue.append(v)
    return seen


def eval_spread(instance: Instance, blocked: Iterable[int], w: int) -> int:
    return len(reach_set(instance, w, blocked))


def scenario_spreads(instance: Instance, blocked: Iterable[int] = ()) -> list[int]:
    mask = _blocked_mask(instance.label_count, blocked)
    return [len(_bfs(instance.adjacency(w), instance.seeds, mask))
            for w in range(instance.scenario_count)]


def eval_objective(instance: Instance, blocked: Iterable[int] = (),
                   check_budget: bool = False) -> Fraction:
    """Average spread over all scenarios, as an exact fraction."""
    blocked = sorted(set(blocked))
    if check_budget and not instance.is_feasible(blocked):
        raise BudgetError(f"blocking {blocked} violates the budget {instance.budget}")
    if instance.scenario_count == 0:
        raise InstanceError("instance has no scenarios")
    return Fraction(sum(scenario_spreads(instance, blocked)), instance.scenario_count)


def extended_seed_sets(instance: Instance) -> list[frozenset[int]]:
    """Per scenario, the seeds plus everything they reach over unblockable arcs."""
    mask = [k not in instance.unblockable for k in range(instance.label_count)]
    return [frozenset(_bfs(instance.adjacency(w), instance.seeds, mask))
            for w in range(instance.scenario_count)]


def pure_label_path_closure(instance: Instance) -> Instance:
    """Add seed-to-node shortcut arcs for every single-label path.

    For every scenario, seed ``i``, label ``k`` and non-seed ``j`` reachable
    from ``i`` over live label-``k`` arcs only, arc ``(i, j, k)`` is made live
    in that scenario. An existing base arc is reused; otherwise a new arc is
    appended to the graph (live only in the scenarios that need it).
    """
    g = instance.graph
    arcs = g.arcs()
    index = dict(g.arc_index)
    seeds = set(instance.seeds)
    new_live = []
    for w in range(instance.scenario_count):
        adj = instance.adjacency(w)
        live = set(instance.scenarios[w].tolist())
        present = {k for k in adj.labels}
        for k in sorted(present):
            mask = [True] * g.label_count
            mask[k] = False
            for i in instance.seeds:
                for j in sorted(_bfs(adj, (i,), mask)):
                    if j in seeds:
                        continue
                    key = (i, j, k)
                    a = index.get(key)
                    if a is None:
                        a = index[key] = len(arcs)
                        arcs.append(key)
                    live.add(a)
        new_live.append(np.array(sorted(live), dtype=np.int64))
    graph = LabeledDigraph.from_arcs(g.node_count, arcs, g.label_count)
    return Instance(graph, instance.costs, instance.budget, instance.seeds,
                    ScenarioSet(tuple(new_live)), instance.name)


def as_label_set(x: Sequence[float], tol: float = 1e-6) -> list[int]:
    """Labels set to one in a (near-)binary blocking vector."""
    return [k for k, v in enumerate(x) if v > 1 - tol]
