"""Multi-seed experiment runner, aggregation and file emission.

Cells are (method, n_vehicles, seed) triples.  Each cell is a sequential
horizon run; cells run concurrently in worker processes and results are
reduced in sorted cell-key order so output files do not depend on the
scheduling.
"""

from __future__ import annotations

import csv
import io
import json
import math
import os
import traceback
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .baselines import method_spec
from .config import ExperimentConfig
from .schema import METHODS, csv_columns
from .scheduler import SlotMetrics, run_horizon


@dataclass
class CellResult:
    method: str
    n_vehicles: int
    seed: int
    metrics: list = field(default_factory=list)
    error: str | None = None

    @property
    def key(self):
        return cell_key(self.method, self.n_vehicles, self.seed)


@dataclass
class Report:
    cells: list
    summary: dict
    files: dict

    @property
    def failed(self) -> list:
        return [c for c in self.cells if c.error is not None]


def cell_key(method: str, n_vehicles: int, seed: int):
    return (METHODS.index(method) if method in METHODS else len(METHODS), method, n_vehicles, seed)


def expand_methods(methods) -> list[str]:
    out = []
    for m in methods:
        for name in (METHODS if m == "all" else [m]):
            if name not in out:
                out.append(name)
    return sorted(out, key=lambda m: cell_key(m, 0, 0))


def run_cell(exp: ExperimentConfig, method: str, n_vehicles: int, seed: int) -> CellResult:
    """Run one cell; any exception is captured and returned as a failed cell."""
    try:
        cfg = exp.scenario.with_(n_vehicles=n_vehicles)
        metrics = run_horizon(cfg, exp.n_slots, seed, method_spec(method, cfg))
        return CellResult(method, n_vehicles, seed, metrics)
    except Exception as exc:  # noqa: BLE001 - a failed cell must not stop the run
        msg = f"{type(exc).__name__}: {exc}\n{traceback.format_exc(limit=3)}"
        return CellResult(method, n_vehicles, seed, [], msg)


def _run_cell_args(args):
    return run_cell(*args)


def run_cells(exp: ExperimentConfig) -> list[CellResult]:
    jobs = [(exp, m, v, s) for m in expand_methods(exp.methods)
            for v in exp.vehicles for s in exp.seeds]
    if exp.workers > 1 and len(jobs) > 1:
        with ProcessPoolExecutor(max_workers=exp.workers) as pool:
            cells = list(pool.map(_run_cell_args, jobs))
    else:
        cells = [run_cell(*j) for j in jobs]
    return sorted(cells, key=lambda c: c.key)


# -- aggregation ------------------------------------------------------------

def _finite(x: float) -> float:
    x = float(x)
    return x if math.isfinite(x) else 0.0


def _cv(x) -> float:
    x = np.asarray(x, dtype=float)
    m = x.mean()
    return float(x.std() / abs(m)) if x.size and m != 0 else 0.0


def seed_stats(metrics: list[SlotMetrics]) -> dict:
    """Per-seed aggregates of one horizon run."""
    delay = np.array([m.mean_task_delay for m in metrics])
    dedr = np.array([m.dedr for m in metrics])
    energy = np.array([m.energy for m in metrics])  # (N, U)
    e_tr = np.array([m.e_tr for m in metrics])
    q = len(metrics) // 4
    return {
        "mean_delay": float(delay.mean()),
        "mean_e_tr": float(e_tr.mean()),  # per L-UAV per slot
        "mean_energy": float(energy.mean()),
        "max_luav_avg_energy": float(energy.mean(axis=0).max()),
        "luav_avg_energy": energy.mean(axis=0).tolist(),
        "deadline_violations": float(np.mean([m.deadline_violations for m in metrics])),
        "mean_queue": float(np.mean([m.queue.mean() for m in metrics])),
        "dedr_mean": float(dedr.mean()),
        "dedr_cv": _cv(dedr),
        "dedr_first_quartile": float(dedr[:max(q, 1)].mean()),
        "dedr_last_quartile": float(dedr[-max(q, 1):].mean()),
        "flagged_slots": int(sum(m.flagged for m in metrics)),
    }


_SCALARS = ("mean_delay", "mean_e_tr", "mean_energy", "max_luav_avg_energy",
            "deadline_violations", "mean_queue", "dedr_mean", "dedr_cv",
            "dedr_first_quartile", "dedr_last_quartile")


def summarise(cells: list[CellResult]) -> dict:
    """Per (method, V) means/stds over seeds, deltas and energy ratios vs MTUEC."""
    groups: dict = {}
    for c in cells:
        if c.error is None and c.metrics:
            groups.setdefault((c.n_vehicles, c.method), []).append(seed_stats(c.metrics))
    by_v: dict = {}
    for (v, method), stats in sorted(groups.items(), key=lambda kv: (kv[0][0], cell_key(kv[0][1], 0, 0))):
        entry = {"n_seeds": len(stats)}
        for name in _SCALARS:
            vals = np.array([s[name] for s in stats])
            entry[name] = {"mean": _finite(vals.mean()), "std": _finite(vals.std())}
        per_luav = np.array([s["luav_avg_energy"] for s in stats])
        entry["luav_avg_energy"] = [_finite(x) for x in per_luav.mean(axis=0)]
        entry["flagged_slots"] = int(sum(s["flagged_slots"] for s in stats))
        by_v.setdefault(str(v), {})[method] = entry
    for v, methods in by_v.items():
        ref = methods.get("mtuec")
        if ref is None:
            continue
        for method, entry in methods.items():
            if method == "mtuec":
                continue
            entry["delta_vs_mtuec_pct"] = {
                name: _finite(100.0 * (entry[name]["mean"] - ref[name]["mean"]) / ref[name]["mean"])
                if ref[name]["mean"] != 0 else 0.0
                for name in ("mean_delay", "mean_e_tr", "mean_energy", "dedr_cv")
            }
            entry["e_tr_ratio_to_mtuec"] = (
                _finite(entry["mean_e_tr"]["mean"] / ref["mean_e_tr"]["mean"])
                if ref["mean_e_tr"]["mean"] != 0 else 0.0)
    failed = [{"method": c.method, "n_vehicles": c.n_vehicles, "seed": c.seed,
               "error": c.error.splitlines()[0]} for c in cells if c.error is not None]
    return {"by_vehicles": by_v, "failed_cells": failed}


# -- emission ---------------------------------------------------------------

def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x) if math.isfinite(x) else "0.0"
    return str(x)


def csv_text(cells: list[CellResult], n_luav: int) -> str:
    cols = csv_columns(n_luav)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(cols)
    for c in sorted(cells, key=lambda c: c.key):
        for m in c.metrics:
            row = m.row()
            w.writerow([_fmt(row[k]) for k in cols])
    return buf.getvalue()


def json_text(summary: dict) -> str:
    return json.dumps(summary, sort_keys=True, indent=2, allow_nan=False) + "\n"


def run_experiment(exp: ExperimentConfig, write: bool = True) -> Report:
    """Run every cell, aggregate and (optionally) write ``slots.csv`` / ``summary.json``."""
    cells = run_cells(exp)
    summary = summarise(cells)
    files = {}
    if write:
        os.makedirs(exp.out_dir, exist_ok=True)
        if "csv" in exp.emit:
            path = os.path.join(exp.out_dir, "slots.csv")
            with open(path, "w", newline="") as fh:
                fh.write(csv_text(cells, exp.scenario.n_luav))
            files["csv"] = path
        if "json" in exp.emit:
            path = os.path.join(exp.out_dir, "summary.json")
            with open(path, "w") as fh:
                fh.write(json_text(summary))
            files["json"] = path
    return Report(cells, summary, files)
