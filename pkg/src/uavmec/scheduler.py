"""Per-slot block coordinate descent and the horizon loop.

Each slot runs allocation -> L-UAV trajectory -> H-UAV trajectory until the
slot objective stalls, then the energy deviation queues are advanced.  The
same loop drives MTUEC and the baselines; a :class:`MethodSpec` switches off
or replaces individual blocks.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Optional

import numpy as np

from .allocation import AllocationDecision, solve_subproblem1
from .config import ScenarioConfig
from .problem import BackupLink, SlotProblem
from .queues import EnergyDeviationQueue, update_queue
from .scenario import ScenarioStream, SlotSnapshot
from .solver import SolverError
from .trajectory import TrajectoryDecision, solve_subproblem2, solve_subproblem3


@dataclass(frozen=True)
class MethodSpec:
    name: str
    backup: BackupLink
    backup_start: tuple
    move_luav: bool = True
    move_backup: bool = True
    backup_path: Optional[Callable[[int], np.ndarray]] = None  # scripted position per slot
    queue_weighted: bool = True  # False: energy-blind objective
    energy_cap: Optional[float] = None  # hard per-slot L-UAV energy cap


def mtuec_spec(cfg: ScenarioConfig) -> MethodSpec:
    return MethodSpec("mtuec", BackupLink((cfg.h2 - cfg.h1) ** 2, cfg.f_huav_cap, cfg.s_huav_max),
                      tuple(cfg.huav_position))


@dataclass
class SlotSolution:
    allocation: AllocationDecision
    trajectory: TrajectoryDecision
    objective_trace: list
    bcd_iterations: int
    deadline_violations: int
    flags: set = field(default_factory=set)


@dataclass
class SlotMetrics:
    method: str
    seed: int
    n_vehicles: int
    slot: int
    mean_task_delay: float
    total_delay: float
    deadline_violations: int
    mean_violation: float
    e_comp: np.ndarray  # per L-UAV, J
    e_tr: np.ndarray
    e_flight: np.ndarray
    queue: np.ndarray  # Q_u(n+1), after this slot's update
    luav: np.ndarray  # (U, 2) positions held during the slot
    huav: np.ndarray
    dedr: float
    objective: float
    bcd_iterations: int
    flagged: bool = False

    @property
    def energy(self) -> np.ndarray:
        return self.e_comp + self.e_tr + self.e_flight

    def row(self) -> dict:
        out = {
            "method": self.method, "seed": self.seed, "n_vehicles": self.n_vehicles,
            "slot": self.slot, "mean_task_delay": self.mean_task_delay,
            "total_delay": self.total_delay, "deadline_violations": self.deadline_violations,
            "mean_violation": self.mean_violation, "e_comp_total": float(self.e_comp.sum()),
            "e_tr_total": float(self.e_tr.sum()), "e_flight_total": float(self.e_flight.sum()),
            "mean_queue": float(self.queue.mean()), "dedr": self.dedr, "objective": self.objective,
            "bcd_iterations": self.bcd_iterations, "huav_x": float(self.huav[0]),
            "huav_y": float(self.huav[1]), "flagged": int(self.flagged),
        }
        for u in range(self.queue.size):
            out[f"e_comp_{u}"] = float(self.e_comp[u])
            out[f"e_tr_{u}"] = float(self.e_tr[u])
            out[f"e_flight_{u}"] = float(self.e_flight[u])
            out[f"queue_{u}"] = float(self.queue[u])
            out[f"x_{u}"] = float(self.luav[u, 0])
            out[f"y_{u}"] = float(self.luav[u, 1])
        return out


def compute_dedr(mean_delay: float, mean_queue_dev: float, epsilon: float) -> float:
    """Delay-to-energy-deviation ratio ``delay / (deviation + epsilon)``."""
    if not epsilon > 0:
        raise ValueError("epsilon must be positive")
    return float(mean_delay) / (float(mean_queue_dev) + epsilon)


def build_problem(cfg: ScenarioConfig, snap: SlotSnapshot, queues: EnergyDeviationQueue,
                  spec: MethodSpec, k: float) -> SlotProblem:
    q = queues.values if spec.queue_weighted else np.zeros(len(queues))
    return SlotProblem(cfg, snap, spec.backup, q, k, energy_cap=spec.energy_cap)


def _bcd(problem: SlotProblem, spec: MethodSpec, backup0):
    cfg = problem.cfg
    luav = problem.prev_luav.copy()
    backup = np.array(backup0, dtype=float)
    alloc = solve_subproblem1(problem, luav, backup)
    traj = TrajectoryDecision(luav, backup)
    trace = [alloc.objective]
    iters = 0
    for j in range(cfg.bcd_max_iter):
        iters = j + 1
        if j > 0:
            alloc = solve_subproblem1(problem, luav, backup, warm=alloc)
        l_traces = []
        if spec.move_luav:
            luav, l_traces = solve_subproblem2(problem, alloc, luav, backup)
        h_trace = []
        if spec.move_backup:
            backup, h_trace = solve_subproblem3(problem, alloc, luav, backup)
        traj = TrajectoryDecision(luav.copy(), backup.copy(), l_traces, h_trace)
        obj = problem.evaluate(alloc.alpha, alloc.f_lu, alloc.f_hu, luav, backup).objective
        prev = trace[-1]
        trace.append(obj)
        if prev - obj <= cfg.bcd_rel_tol * abs(obj):
            break
    return alloc, traj, trace, iters


def run_slot(cfg: ScenarioConfig, snap: SlotSnapshot, queues: EnergyDeviationQueue,
             spec: MethodSpec, k: float, backup0=None):
    """Solve one slot.  Returns ``(SlotSolution, Breakdown, SlotProblem)``.

    ``backup0`` is the backup-server position at the start of the block
    descent (the previous slot's, or the scripted path point).
    """
    problem = build_problem(cfg, snap, queues, spec, k)
    backup0 = problem.prev_backup if backup0 is None else backup0
    flags = set()
    try:
        alloc, traj, trace, iters = _bcd(problem, spec, backup0)
    except SolverError:
        # hold every UAV where it was and only re-allocate
        flags.add("fallback")
        luav = problem.prev_luav.copy()
        backup = np.array(backup0, dtype=float)
        alloc = solve_subproblem1(problem, luav, backup)
        traj = TrajectoryDecision(luav, backup)
        trace, iters = [alloc.objective], 0
    flags |= alloc.flags
    br = problem.evaluate(alloc.alpha, alloc.f_lu, alloc.f_hu, traj.luav_next, traj.huav_next)
    late = int(np.sum(br.delays > problem.tau))
    sol = SlotSolution(alloc, traj, trace, iters, late, flags)
    return sol, br, problem


def run_horizon(cfg: ScenarioConfig, n_slots: int, seed: int, spec: MethodSpec | None = None,
                k: float | None = None, snapshots=None):
    """Run ``n_slots`` slots for one seed and return the list of SlotMetrics.

    ``snapshots`` may be an iterable of recorded SlotSnapshot objects to
    replay instead of generating the scenario from the seed.
    """
    if n_slots < 1:
        raise ValueError("n_slots must be at least 1")
    spec = spec or mtuec_spec(cfg)
    k = cfg.k_penalty if k is None else k
    stream = None if snapshots is not None else ScenarioStream(cfg, seed)
    replay = iter(snapshots) if snapshots is not None else None
    queues = EnergyDeviationQueue.zeros(cfg.n_luav)
    luav = np.array(cfg.luav_positions, dtype=float)
    backup = np.array(spec.backup_start, dtype=float)
    out = []
    for n in range(n_slots):
        if replay is not None:
            snap = next(replay).with_positions(luav, backup)
        else:
            snap = stream.next_snapshot(luav, backup)
        start = spec.backup_path(n) if spec.backup_path is not None else backup
        sol, br, _ = run_slot(cfg, snap, queues, spec, k, backup0=start)
        queues = update_queue(queues, br.energy, cfg.e_quota)
        luav, backup = sol.trajectory.luav_next, sol.trajectory.huav_next
        n_v = br.delays.size
        mean_delay = float(br.delays.mean()) if n_v else 0.0
        late = np.maximum(br.delays - snap.deadline, 0.0)
        out.append(SlotMetrics(
            method=spec.name, seed=seed, n_vehicles=n_v, slot=n,
            mean_task_delay=mean_delay, total_delay=float(br.delays.sum()),
            deadline_violations=sol.deadline_violations,
            mean_violation=float(late.mean()) if n_v else 0.0,
            e_comp=br.e_comp, e_tr=br.e_tr, e_flight=br.e_flight, queue=queues.values,
            luav=luav.copy(), huav=backup.copy(),
            dedr=compute_dedr(mean_delay, float(queues.values.mean()), cfg.dedr_epsilon),
            objective=float(br.objective), bcd_iterations=sol.bcd_iterations,
            flagged=bool(sol.flags),
        ))
    return out
