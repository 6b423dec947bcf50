"""Synthetic instance generation.

All randomness comes from numpy's counter-based Philox generator. A stream
for one purpose is ``Philox(SeedSequence(rng_seed, spawn_key=(purpose,)))``
with purpose ids GRAPH=0, LABELS=1, PARALLEL=2, SCENARIOS=3, RR_SETS=4, so
e.g. resampling scenarios never perturbs the graph drawn from the same seed.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .graph import Instance, InstanceError, LabeledDigraph, ScenarioSet

GRAPH, LABELS, PARALLEL, SCENARIOS, RR_SETS = range(5)

# mean of the label distribution by (label class, number of blockable labels)
LABEL_MEANS = {(1, 20): 5.0, (1, 30): 8.0, (2, 20): 8.0, (2, 30): 12.0}


def stream(rng_seed: int, purpose: int) -> np.random.Generator:
    ss = np.random.SeedSequence(int(rng_seed) & (2**64 - 1), spawn_key=(purpose,))
    return np.random.Generator(np.random.Philox(ss))


@dataclass(frozen=True)
class GenConfig:
    model: str = "ba"
    n: int = 100
    m: int = 300
    n_labels: int = 20
    label_class: int = 1
    p_live: float = 0.1
    scenario_count: int = 50
    seed_count: int = 50
    rr_samples: int = 1000
    rng_seed: int = 0
    label_mean: float | None = None
    parallel_arcs: bool = False

    def __post_init__(self):
        if self.model.lower() not in ("ba", "er"):
            raise ValueError("model must be 'ba' or 'er'")
        if self.n < 1 or self.m < 0 or self.n_labels < 1:
            raise ValueError("need n >= 1, m >= 0 and at least one label")
        if not 0 <= self.p_live <= 1:
            raise ValueError("p_live must lie in [0, 1]")
        if min(self.scenario_count, self.seed_count, self.rr_samples) < 0:
            raise ValueError("counts must be nonnegative")
        if self.label_class not in (1, 2):
            raise ValueError("label class must be 1 or 2")

    @property
    def mean(self) -> float:
        if self.label_mean is not None:
            return self.label_mean
        try:
            return LABEL_MEANS[(self.label_class, self.n_labels)]
        except KeyError:
            raise ValueError(
                f"no default label mean for class {self.label_class} with "
                f"{self.n_labels} labels; pass label_mean") from None


@dataclass(frozen=True)
class SampleSizeParams:
    sigma2_max: float
    epsilon: float
    rho: float
    alpha: float
    feasible_count: float

    def __post_init__(self):
        if self.sigma2_max < 0:
            raise ValueError("sigma2_max must be nonnegative")
        if not self.epsilon > self.rho >= 0:
            raise ValueError("need epsilon > rho >= 0")
        if not 0 < self.alpha < 1:
            raise ValueError("alpha must lie in (0, 1)")
        if self.feasible_count <= 0:
            raise ValueError("feasible_count must be positive")


def saa_sample_size(params: SampleSizeParams) -> int:
    """Scenario count that makes rho-optimal SAA solutions epsilon-optimal w.p. 1-alpha."""
    p = params
    value = 3.0 * p.sigma2_max / (p.epsilon - p.rho) ** 2 * math.log(p.feasible_count / p.alpha)
    return max(0, math.ceil(value - 1e-9))


# graphs -------------------------------------------------------------------

def gen_graph(config: GenConfig) -> list[tuple[int, int]]:
    """Undirected simple edge list (u < v not guaranteed) for the config."""
    rng = stream(config.rng_seed, GRAPH)
    if config.model.lower() == "er":
        return _erdos_renyi(config.n, config.m, rng)
    return _barabasi_albert(config.n, config.m, rng)


def _erdos_renyi(n: int, m: int, rng) -> list[tuple[int, int]]:
    total = n * (n - 1) // 2
    if m > total:
        raise InstanceError(f"G(n, m) with n={n} holds at most {total} edges, asked for {m}")
    if m == 0:
        return []
    picks = np.sort(rng.choice(total, size=m, replace=False))
    # pairs (i, j), i < j, enumerated row by row; row i starts at offsets[i]
    rows = np.arange(n, dtype=np.int64)
    offsets = rows * (2 * n - rows - 1) // 2
    i = np.searchsorted(offsets, picks, side="right") - 1
    j = picks - offsets[i] + i + 1
    return list(zip(i.tolist(), j.tolist()))


def _barabasi_albert(n: int, m: int, rng) -> list[tuple[int, int]]:
    d = max(1, math.ceil(m / n)) if n else 1
    core = min(d, n)
    edges = [(i, j) for i in range(core) for j in range(i + 1, core)]
    # endpoint list: a node appears once per incident edge
    ends = [v for e in edges for v in e]
    for v in range(core, n):
        want = min(d, v)
        chosen: list[int] = []
        attempts = 0
        while len(chosen) < want and attempts < v:
            if ends:
                t = ends[int(rng.integers(len(ends)))]
            else:
                t = int(rng.integers(v))
            attempts += 1
            if t not in chosen:
                chosen.append(t)
        if len(chosen) < want:
            rest = [u for u in range(v) if u not in chosen]
            extra = rng.choice(len(rest), size=want - len(chosen), replace=False)
            chosen += [rest[i] for i in sorted(extra.tolist())]
        for t in chosen:
            edges.append((t, v))
            ends += (t, v)
    return edges


# labels and parallel arcs ---------------------------------------------------

def sample_geometric(mean: float, size: int, rng) -> np.ndarray:
    """Negative binomial with size 1 (geometric on {0, 1, ...}), by inverse CDF."""
    if mean <= 0:
        return np.zeros(size, dtype=np.int64)
    q = 1.0 / (1.0 + mean)
    u = 1.0 - rng.random(size)  # in (0, 1]
    return np.floor(np.log(u) / math.log1p(-q)).astype(np.int64)


def assign_labels_negbin(edges: Sequence, n_labels: int, label_class: int = 1,
                         rng_seed: int = 0, mean: float | None = None) -> list[tuple]:
    """Attach a label in {0..n_labels} to every edge; label 0 collects the tail."""
    if mean is None:
        mean = LABEL_MEANS[(label_class, n_labels)]
    raw = sample_geometric(mean, len(edges), stream(rng_seed, LABELS))
    lab = raw + 1
    lab[lab > n_labels] = 0
    return [(int(u), int(v), int(k)) for (u, v), k in zip(edges, lab.tolist())]


def add_parallel_arcs(graph: LabeledDigraph, rng_seed: int = 0,
                      p_one: float = 0.10, p_two: float = 0.05) -> LabeledDigraph:
    """Copy each arc once (prob. p_one) or twice (p_two) under fresh labels."""
    rng = stream(rng_seed, PARALLEL)
    arcs = graph.arcs()
    on_pair: dict[tuple[int, int], set] = {}
    for u, v, k in arcs:
        on_pair.setdefault((u, v), set()).add(k)
    out = list(arcs)
    draws = rng.random(len(arcs))
    for (u, v, _), r in zip(arcs, draws.tolist()):
        copies = 1 if r < p_one else 2 if r < p_one + p_two else 0
        used = on_pair[(u, v)]
        for _ in range(copies):
            free = [k for k in range(graph.label_count) if k not in used]
            if not free:
                raise InstanceError(f"no free label left for parallel arc ({u}, {v})")
            k = free[int(rng.integers(len(free)))]
            used.add(k)
            out.append((u, v, k))
    return LabeledDigraph.from_arcs(graph.node_count, out, graph.label_count)


# scenarios and seeds ---------------------------------------------------------

def sample_scenarios(graph: LabeledDigraph, p_live: float, count: int,
                     rng_seed: int = 0) -> ScenarioSet:
    if not 0 <= p_live <= 1:
        raise ValueError("p_live must lie in [0, 1]")
    rng = stream(rng_seed, SCENARIOS)
    live = []
    for _ in range(count):
        flips = rng.random(graph.arc_count) < p_live
        live.append(np.flatnonzero(flips))
    return ScenarioSet(tuple(live))


def rr_sets(graph: LabeledDigraph, p_live: float, count: int, rng_seed: int = 0) -> list[list[int]]:
    """Reverse-reachable sets; each arc's coin is flipped only when first examined."""
    rng = stream(rng_seed, RR_SETS)
    n = graph.node_count
    order = np.argsort(graph.heads, kind="stable")
    indptr = np.searchsorted(graph.heads[order], np.arange(n + 1)).tolist()
    tails = graph.tails[order].tolist()
    out = []
    for _ in range(count):
        root = int(rng.integers(n))
        seen = {root}
        stack = [root]
        while stack:
            v = stack.pop()
            lo, hi = indptr[v], indptr[v + 1]
            if lo == hi:
                continue
            coins = rng.random(hi - lo) < p_live
            for t, live in zip(tails[lo:hi], coins.tolist()):
                if live and t not in seen:
                    seen.add(t)
                    stack.append(t)
        out.append(sorted(seen))
    return out


def greedy_max_coverage(sets: Sequence[Sequence[int]], n: int, k: int) -> list[int]:
    """Pick k nodes covering the most sets; ties go to the smallest node."""
    covers: list[list[int]] = [[] for _ in range(n)]
    for s, members in enumerate(sets):
        for v in members:
            covers[v].append(s)
    gain = np.array([len(c) for c in covers], dtype=np.int64)
    covered = np.zeros(len(sets), dtype=bool)
    chosen = []
    picked = np.zeros(n, dtype=bool)
    for _ in range(min(k, n)):
        masked = np.where(picked, -1, gain)
        v = int(np.argmax(masked))
        chosen.append(v)
        picked[v] = True
        for s in covers[v]:
            if not covered[s]:
                covered[s] = True
                for u in sets[s]:
                    gain[u] -= 1
    return sorted(chosen)


def select_seeds_imm(graph: LabeledDigraph, p_live: float, seed_count: int,
                     rr_samples: int = 1000, rng_seed: int = 0) -> list[int]:
    if rr_samples < 1:
        raise ValueError("need at least one RR set")
    if seed_count > graph.node_count:
        raise ValueError("more seeds than nodes")
    sets = rr_sets(graph, p_live, rr_samples, rng_seed)
    return greedy_max_coverage(sets, graph.node_count, seed_count)


def generate_instance(config: GenConfig, budget: float = 4, name: str = "") -> Instance:
    """The full pipeline: graph, labels, optional parallel arcs, scenarios, seeds.

    Label 0 is unblockable; labels 1..n_labels cost one unit each.
    """
    edges = gen_graph(config)
    labeled = assign_labels_negbin(edges, config.n_labels, config.label_class,
                                   config.rng_seed, config.mean)
    graph = LabeledDigraph.from_undirected(config.n, labeled, config.n_labels + 1)
    if config.parallel_arcs:
        graph = add_parallel_arcs(graph, config.rng_seed)
    scenarios = sample_scenarios(graph, config.p_live, config.scenario_count, config.rng_seed)
    seeds = select_seeds_imm(graph, config.p_live, config.seed_count,
                             config.rr_samples, config.rng_seed)
    costs = (math.inf,) + (1.0,) * config.n_labels
    return Instance(graph, costs, budget, tuple(seeds), scenarios, name)
