"""
Benchmark over the nine synthetic problem sizes of the original accuracy
table, plus an anchor-count sweep at fixed dimensions.
"""
import os
import statistics
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, replace

import numpy as np

from .datagen import generate_instance
from .solver import SolverConfig, run_solver

__all__ = ["BenchRow", "TABLE1", "ROW_GROUPS", "select_rows", "run_cell",
           "run_bench", "format_table", "default_jobs"]

JOBS_ENV = "PROXNMF_JOBS"


@dataclass(frozen=True)
class BenchRow:
    name: str
    m: int
    n: int
    r: int
    regime: str
    epsilon: float
    reference_found: int = None  # anchors identified in the published run


TABLE1 = (
    BenchRow("c1-small", 100, 75, 25, "c1", 1e-5, 25),
    BenchRow("c1-medium", 500, 375, 25, "c1", 1e-4, 23),
    BenchRow("c1-large", 1200, 600, 300, "c1", 1e-4, 300),
    BenchRow("c2-small", 25, 100, 15, "c2", 1e-5, 14),
    BenchRow("c2-medium", 125, 500, 75, "c2", 1e-4, 74),
    BenchRow("c2-large", 425, 1200, 225, "c2", 1e-4, 223),
    BenchRow("c3-small", 25, 100, 45, "c3", 1e-5, 45),
    BenchRow("c3-medium", 125, 500, 150, "c3", 1e-4, 150),
    BenchRow("c3-large", 425, 1200, 625, "c3", 1e-4, 625),
)

# r = 2, r = m/2 and r > m at m = 20, same solver settings throughout
RSWEEP = (
    BenchRow("rsweep-2", 20, 60, 2, "c2", 1e-5),
    BenchRow("rsweep-half", 20, 60, 10, "c2", 1e-5),
    BenchRow("rsweep-over", 20, 60, 30, "c3", 1e-5),
)

ALL_ROWS = {row.name: row for row in TABLE1 + RSWEEP}

ROW_GROUPS = {
    "small": ("c1-small", "c2-small", "c3-small"),
    "medium": ("c1-medium", "c2-medium", "c3-medium"),
    "large": ("c1-large", "c2-large", "c3-large"),
    "table1": tuple(row.name for row in TABLE1),
    "rsweep": tuple(row.name for row in RSWEEP),
}
ROW_GROUPS["all"] = ROW_GROUPS["table1"] + ROW_GROUPS["rsweep"]


def select_rows(selection):
    """Resolve a comma-separated list of row names and group names."""
    names = []
    for tok in str(selection).split(","):
        tok = tok.strip().lower()
        if not tok:
            continue
        if tok in ROW_GROUPS:
            names.extend(ROW_GROUPS[tok])
        elif tok in ALL_ROWS:
            names.append(tok)
        else:
            raise KeyError(f"unknown bench row or group {tok!r}")
    seen = []
    for name in names:
        if name not in seen:
            seen.append(name)
    return [ALL_ROWS[name] for name in seen]


def default_jobs():
    try:
        return max(1, int(os.environ.get(JOBS_ENV, "1")))
    except ValueError:
        return 1


def run_cell(row, seed, cfg=None):
    """Generate one instance of `row` and solve it. Indices in the result are 1-based."""
    cfg = replace(cfg or SolverConfig(), epsilon=row.epsilon, seed=seed)
    inst = generate_instance(row.m, row.n, row.r, row.regime, seed,
                             certify=None if row.n <= 200 else row.r > row.m)
    t0 = time.perf_counter()
    res = run_solver(inst.Xn, cfg)
    elapsed = time.perf_counter() - t0
    found = set(res.anchors.tolist())
    true = set(inst.true_anchors.tolist())
    tp = len(found & true)
    return {
        "row": row.name,
        "seed": seed,
        "found": len(found),
        "true_positives": tp,
        "false_positives": len(found - true),
        "r": row.r,
        "iterations": res.iterations,
        "converged": res.converged,
        "diag_gap": res.diag_gap,
        "wall_time_ms": elapsed * 1e3,
    }


def _cell(args):
    return run_cell(*args)


def run_bench(rows, seeds=5, base_seed=0, jobs=1, cfg=None):
    """
    Solve ``seeds`` instances per row and summarise.

    Returns
    -------
    dict
        ``{"rows": [...], "cells": [...]}``; each row summary carries the
        median and worst identified-anchor counts and the median wall time.
    """
    tasks = [(row, base_seed + k, cfg) for row in rows for k in range(seeds)]
    if jobs > 1 and len(tasks) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            cells = list(pool.map(_cell, tasks))
    else:
        cells = [_cell(t) for t in tasks]

    summary = []
    for row in rows:
        mine = [c for c in cells if c["row"] == row.name]
        tps = [c["true_positives"] for c in mine]
        fps = [c["false_positives"] for c in mine]
        summary.append({
            "row": row.name,
            "m": row.m,
            "n": row.n,
            "r": row.r,
            "regime": row.regime,
            "epsilon": row.epsilon,
            "reference_found": row.reference_found,
            "median_found": statistics.median(tps),
            "worst_found": min(tps),
            "median_accuracy": statistics.median(tps) / row.r,
            "worst_accuracy": min(tps) / row.r,
            "max_false_positives": max(fps),
            "converged": sum(c["converged"] for c in mine),
            "runs": len(mine),
            "median_wall_time_ms": statistics.median(c["wall_time_ms"] for c in mine),
        })
    return {"config": asdict(cfg or SolverConfig()), "seeds": seeds,
            "base_seed": base_seed, "rows": summary, "cells": cells}


def format_table(result):
    header = ("row", "size", "r", "eps", "ref", "median", "worst", "max fp",
              "conv", "median ms")
    lines = [header]
    for s in result["rows"]:
        ref = "-" if s["reference_found"] is None else f"{s['reference_found']}/{s['r']}"
        lines.append((
            s["row"],
            f"{s['m']}x{s['n']}",
            str(s["r"]),
            f"{s['epsilon']:.0e}",
            ref,
            f"{s['median_found']:g}/{s['r']}",
            f"{s['worst_found']}/{s['r']}",
            str(s["max_false_positives"]),
            f"{s['converged']}/{s['runs']}",
            f"{s['median_wall_time_ms']:.0f}",
        ))
    widths = [max(len(line[i]) for line in lines) for i in range(len(header))]
    out = []
    for line in lines:
        out.append("  ".join(cell.rjust(w) for cell, w in zip(line, widths)).rstrip())
    return "\n".join(out) + "\n"


def summary_without_timing(result):
    """`result` with wall-clock fields removed, for reproducibility checks."""
    strip = lambda d: {k: v for k, v in d.items() if "wall_time" not in k}  # noqa: E731
    return {**result, "rows": [strip(r) for r in result["rows"]],
            "cells": [strip(c) for c in result["cells"]]}


def as_jsonable(obj):
    if isinstance(obj, dict):
        return {k: as_jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [as_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    return obj
