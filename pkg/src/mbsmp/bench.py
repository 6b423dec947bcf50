"""Benchmark plans: run (instance, setting) pairs and aggregate per setting."""
from __future__ import annotations

import json
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .io import REPORT_COLUMNS, append_report_rows, load_instance
from .master import SETTINGS, SolverSettings, branch_and_benders_cut

MEAN_FIELDS = ["t_s", "UB", "LB", "gap", "LB0", "nBB", "nIntCut", "nFrCut"]


@dataclass(frozen=True)
class BenchRun:
    instance: str
    setting: str
    budget: float | None = None
    time_limit: float = 3600.0
    tau: float | None = None


@dataclass
class BenchPlan:
    runs: list = field(default_factory=list)
    output: str | None = None
    aggregate: bool = True

    def validate(self):
        for run in self.runs:
            if run.setting not in SETTINGS:
                raise ValueError(f"unknown setting {run.setting!r}")
            load_instance(run.instance)  # raises ParseError on a bad file
        return self

    @classmethod
    def grid(cls, instances, settings, budget=None, time_limit=3600.0, tau=None,
             output=None, aggregate=True) -> "BenchPlan":
        runs = [BenchRun(os.fspath(p), s, budget, time_limit, tau)
                for p in instances for s in settings]
        return cls(runs, output, aggregate)

    @classmethod
    def from_json(cls, path) -> "BenchPlan":
        """Plan file: ``{"instances": [...], "settings": [...], "budget": 4,
        "time_limit": 60, "output": "out.csv"}`` or an explicit ``"runs"`` list
        of objects with the :class:`BenchRun` fields."""
        with open(path, encoding="utf-8") as fh:
            spec = json.load(fh)
        base = os.path.dirname(os.path.abspath(path))

        def resolve(p):
            return p if os.path.isabs(p) else os.path.join(base, p)
        if "runs" in spec:
            runs = [BenchRun(resolve(r["instance"]), r["setting"], r.get("budget"),
                             r.get("time_limit", 3600.0), r.get("tau"))
                    for r in spec["runs"]]
            return cls(runs, spec.get("output"), spec.get("aggregate", True))
        return cls.grid([resolve(p) for p in spec["instances"]], spec["settings"],
                        spec.get("budget"), spec.get("time_limit", 3600.0),
                        spec.get("tau"), spec.get("output"), spec.get("aggregate", True))


def execute_run(run: BenchRun) -> dict:
    instance = load_instance(run.instance)
    if run.budget is not None:
        instance = instance.with_budget(run.budget)
    settings = SolverSettings.from_name(run.setting, run.tau, run.time_limit)
    return branch_and_benders_cut(instance, settings).row()


def mean_rows(rows: list[dict]) -> list[dict]:
    """One row per setting; ``opt`` holds the number of runs solved to optimality."""
    out = []
    for setting in dict.fromkeys(r["setting"] for r in rows):
        group = [r for r in rows if r["setting"] == setting]
        agg = {"instance": "mean", "setting": setting}
        for col in MEAN_FIELDS:
            vals = [float(r[col]) for r in group if r[col] != ""]
            agg[col] = f"{np.mean(vals):.6f}" if vals else ""
        agg["opt"] = str(sum(r["opt"] == "1" for r in group))
        out.append(agg)
    return out


def run_bench(plan: BenchPlan, jobs: int = 1, log=None) -> list[dict]:
    """Execute the plan; rows are appended to ``plan.output`` as they finish."""
    rows: list[dict] = []

    def emit(row):
        rows.append(row)
        if plan.output:
            append_report_rows(plan.output, [row], REPORT_COLUMNS)
        if log:
            log(row)
    try:
        if jobs > 1:
            with ProcessPoolExecutor(jobs) as pool:
                for row in pool.map(execute_run, plan.runs):
                    emit(row)
        else:
            for run in plan.runs:
                emit(execute_run(run))
    finally:
        if plan.aggregate and rows:
            means = mean_rows(rows)
            if plan.output:
                append_report_rows(plan.output, means, REPORT_COLUMNS)
            rows += means
    return rows
