"""Instance files, SNAP edge lists and CSV reports.

Instance format (all indices 0-based, ``#`` starts a comment)::

    n |K| |Omega| B
    costs c_0 ... c_{|K|-1}        # 'inf' marks an unblockable label
    seeds i_1 ... i_|I|
    arcs m
    tail head label                # m lines
    scenario 0 t
    a_1 ... a_t                    # arc indices live in scenario 0
    ...

Scenario arc indices may span any number of lines; the writer puts all of
them on one line (an empty line when t = 0).
"""
from __future__ import annotations

import csv
import math
import os
from typing import Iterable, Iterator, TextIO

import numpy as np

from .graph import Instance, LabeledDigraph, ScenarioSet


class ParseError(ValueError):
    def __init__(self, message: str, line: int | None = None, path: str | None = None):
        where = ""
        if path:
            where += f"{path}:"
        if line is not None:
            where += f"{line}: "
        elif where:
            where += " "
        super().__init__(where + message)
        self.line = line


def format_number(v: float) -> str:
    v = float(v)
    if math.isinf(v):
        return "inf"
    if v.is_integer():
        return str(int(v))
    return repr(v)


def _parse_number(tok: str, line: int) -> float:
    if tok.lower() in ("inf", "+inf", "infinity"):
        return math.inf
    try:
        return float(tok)
    except ValueError:
        raise ParseError(f"expected a number, got {tok!r}", line) from None


def _parse_int(tok: str, line: int) -> int:
    try:
        return int(tok)
    except ValueError:
        raise ParseError(f"expected an integer, got {tok!r}", line) from None


def _tokens(lines: Iterable[str]) -> Iterator[tuple[int, list[str]]]:
    for no, raw in enumerate(lines, 1):
        text = raw.split("#", 1)[0].strip()
        if text:
            yield no, text.split()


def parse_instance(text: str, name: str = "", path: str | None = None) -> Instance:
    try:
        return _parse_instance(text.splitlines(), name)
    except ParseError as exc:
        if path:
            raise ParseError(str(exc), None, path) from None
        raise


def _parse_instance(lines, name) -> Instance:
    rows = list(_tokens(lines))
    pos = 0

    def take(expect: str | None = None):
        nonlocal pos
        if pos >= len(rows):
            raise ParseError(f"unexpected end of file (expected {expect or 'more data'})")
        no, toks = rows[pos]
        pos += 1
        if expect is not None:
            if toks[0].lower() != expect:
                raise ParseError(f"expected '{expect}' line, got {toks[0]!r}", no)
            toks = toks[1:]
        return no, toks

    no, head = take()
    if len(head) != 4:
        raise ParseError("header must be 'n |K| |Omega| B'", no)
    n, nk, nw = (_parse_int(t, no) for t in head[:3])
    budget = _parse_number(head[3], no)
    no, cost_toks = take("costs")
    if len(cost_toks) != nk:
        raise ParseError(f"expected {nk} costs, got {len(cost_toks)}", no)
    costs = [_parse_number(t, no) for t in cost_toks]
    no, seed_toks = take("seeds")
    seeds = [_parse_int(t, no) for t in seed_toks]
    no, arc_head = take("arcs")
    if len(arc_head) != 1:
        raise ParseError("expected 'arcs m'", no)
    m = _parse_int(arc_head[0], no)
    tails, heads, labels = [], [], []
    for _ in range(m):
        no, toks = take()
        if len(toks) != 3:
            raise ParseError("arc line must be 'tail head label'", no)
        t, h, k = (_parse_int(x, no) for x in toks)
        if not (0 <= t < n and 0 <= h < n):
            raise ParseError(f"arc endpoint out of range [0, {n})", no)
        if not 0 <= k < nk:
            raise ParseError(f"label out of range [0, {nk})", no)
        tails.append(t)
        heads.append(h)
        labels.append(k)
    scenarios = []
    for w in range(nw):
        no, toks = take("scenario")
        if len(toks) != 2 or _parse_int(toks[0], no) != w:
            raise ParseError(f"expected 'scenario {w} t'", no)
        t = _parse_int(toks[1], no)
        live: list[int] = []
        while len(live) < t:
            no, toks = take()
            for tok in toks:
                a = _parse_int(tok, no)
                if not 0 <= a < m:
                    raise ParseError(f"arc index {a} out of range [0, {m})", no)
                live.append(a)
        if len(live) != t:
            raise ParseError(f"scenario {w} lists {len(live)} arcs, header says {t}", no)
        if len(set(live)) != len(live):
            raise ParseError(f"scenario {w} lists an arc twice", no)
        scenarios.append(np.array(live, dtype=np.int64))
    if pos != len(rows):
        raise ParseError("trailing data after the last scenario", rows[pos][0])
    try:
        graph = LabeledDigraph(n, np.array(tails), np.array(heads), np.array(labels), nk)
        return Instance(graph, tuple(costs), budget, tuple(seeds),
                        ScenarioSet(tuple(scenarios)), name)
    except ValueError as exc:
        raise ParseError(str(exc)) from None


def format_instance(instance: Instance) -> str:
    g = instance.graph
    out = [f"{g.node_count} {g.label_count} {instance.scenario_count} "
           f"{format_number(instance.budget)}",
           "costs " + " ".join(format_number(c) for c in instance.costs),
           "seeds " + " ".join(str(i) for i in instance.seeds),
           f"arcs {g.arc_count}"]
    out += [f"{t} {h} {k}" for t, h, k in g.arcs()]
    for w, live in enumerate(instance.scenarios.live_arcs):
        out.append(f"scenario {w} {len(live)}")
        out.append(" ".join(str(a) for a in live.tolist()))
    return "\n".join(out) + "\n"


def load_instance(path: str | os.PathLike) -> Instance:
    path = os.fspath(path)
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    name = os.path.splitext(os.path.basename(path))[0]
    return parse_instance(text, name, path)


def save_instance(instance: Instance, path: str | os.PathLike):
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(format_instance(instance))


def read_edge_list(fh: TextIO) -> tuple[int, list[tuple[int, int]], list]:
    """Parse a SNAP-style whitespace edge list.

    Node ids are densified in order of first appearance. Returns
    ``(node_count, edges, original_ids)``.
    """
    ids: dict[str, int] = {}
    edges = []
    for no, raw in enumerate(fh, 1):
        text = raw.strip()
        if not text or text.startswith("#") or text.startswith("%"):
            continue
        toks = text.split()
        if len(toks) < 2:
            raise ParseError("edge line needs two node ids", no)
        uv = []
        for tok in toks[:2]:
            try:
                int(tok)
            except ValueError:
                raise ParseError(f"node id {tok!r} is not an integer", no) from None
            uv.append(ids.setdefault(tok, len(ids)))
        edges.append((uv[0], uv[1]))
    original = [int(t) for t in ids]
    return len(ids), edges, original


def simple_edges(edges: Iterable[tuple[int, int]], undirected: bool) -> list[tuple[int, int]]:
    """Drop self-loops and duplicates; undirected edges are compared unordered."""
    seen = set()
    out = []
    for u, v in edges:
        if u == v:
            continue
        key = (min(u, v), max(u, v)) if undirected else (u, v)
        if key in seen:
            continue
        seen.add(key)
        out.append(key if undirected else (u, v))
    return out


REPORT_COLUMNS = ["instance", "setting", "t_s", "UB", "LB", "gap", "LB0",
                  "nBB", "nIntCut", "nFrCut", "opt"]


def append_report_rows(path: str | os.PathLike, rows: Iterable[dict],
                       columns: list[str] = REPORT_COLUMNS):
    exists = os.path.exists(path) and os.path.getsize(path) > 0
    with open(path, "a", encoding="utf-8", newline="") as fh:
        writer = csv.DictWriter(fh, fieldnames=columns, lineterminator="\n")
        if not exists:
            writer.writeheader()
        for row in rows:
            writer.writerow(row)
            fh.flush()


def read_report(path: str | os.PathLike) -> list[dict]:
    with open(path, encoding="utf-8", newline="") as fh:
        return list(csv.DictReader(fh))
