"""One slot's deterministic optimisation instance and its objective.

The objective is the drift-plus-penalty merit

    K * sum_v T_v + sum_u Q_u * E_u + sum_v rho_v * max(T_v - deadline_v, 0)

where the last term is the soft form of the per-task deadline constraint.
Every block solver (allocation, L-UAV and H-UAV trajectories) minimises this
same function over its own variables, which is what makes the block-descent
traces monotone.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from .config import ScenarioConfig
from .model import LOG2E, rate_of_phi, sq_dist
from .scenario import SlotSnapshot


@dataclass(frozen=True)
class BackupLink:
    """Geometry of the upper-tier server seen from the L-UAVs."""

    altitude_gap_sq: float
    f_cap: float  # Hz
    speed_max: float = 0.0  # m/s; 0 for a static server


@dataclass
class Breakdown:
    delays: np.ndarray  # (V,)
    e_comp: np.ndarray  # (U,)
    e_tr: np.ndarray
    e_flight: np.ndarray
    penalty: float
    objective: float
    r_v2lu: np.ndarray
    r_lu2hu: np.ndarray

    @property
    def energy(self) -> np.ndarray:
        return self.e_comp + self.e_tr + self.e_flight


@dataclass
class SlotProblem:
    cfg: ScenarioConfig
    snap: SlotSnapshot
    backup: BackupLink
    queues: np.ndarray  # weights Q_u used in the objective
    k: float
    energy_cap: float | None = None  # hard per-slot L-UAV energy cap
    rho: np.ndarray = field(default=None)  # per-task lateness weight
    attainable: np.ndarray = field(default=None)

    def __post_init__(self):
        cfg = self.cfg
        self.queues = np.asarray(self.queues, dtype=float)
        self.D = self.snap.data_bits
        self.W = self.snap.workload
        self.tau = self.snap.deadline
        self.assoc = self.snap.association
        self.n_v = self.D.size
        self.n_u = cfg.n_luav
        self.prev_luav = np.asarray(self.snap.luav_positions, dtype=float)
        self.prev_backup = np.asarray(self.snap.huav_position, dtype=float)
        self.kappa_g = cfg.kappa * 1e27  # energy per Gcycle at 1 GHz
        if self.attainable is None:
            r_vu, r_uh = self.rates(self.prev_luav, self.prev_backup)
            best = self.D / r_vu + np.minimum(self.W / cfg.f_luav_cap,
                                              self.D / r_uh[self.assoc] + self.W / self.backup.f_cap)
            self.attainable = best <= self.tau
        if self.rho is None:
            self.rho = self.k * np.where(self.attainable, cfg.deadline_penalty,
                                         cfg.relaxed_deadline_penalty)

    # -- links -------------------------------------------------------------
    def v2lu_rate_params(self):
        c = self.cfg
        return c.b_v2lu, c.p_vehicle, c.h1 ** 2

    def lu2hu_rate_params(self):
        c = self.cfg
        return c.b_lu2hu, c.p_luav, self.backup.altitude_gap_sq

    def rates(self, luav, backup):
        c = self.cfg
        luav = np.asarray(luav, dtype=float)
        phi_v = sq_dist(luav[self.assoc], self.snap.vehicle_positions)
        r_vu = rate_of_phi(phi_v, c.b_v2lu, c.p_vehicle, c.gamma0, c.n0, c.h1 ** 2)
        phi_u = sq_dist(luav, np.asarray(backup, dtype=float)[None, :])
        r_uh = rate_of_phi(phi_u, c.b_lu2hu, c.p_luav, c.gamma0, c.n0, self.backup.altitude_gap_sq)
        return r_vu, r_uh

    # -- objective ---------------------------------------------------------
    def evaluate(self, alpha, f_lu, f_hu, luav, backup) -> Breakdown:
        c = self.cfg
        alpha = np.asarray(alpha, dtype=float)
        r_vu, r_uh = self.rates(luav, backup)
        r_uh_v = r_uh[self.assoc]
        with np.errstate(divide="ignore", invalid="ignore"):
            t_lu = np.where(alpha > 0, self.W * alpha / f_lu, 0.0)
            t_hu = np.where(alpha < 1, self.W * (1 - alpha) / f_hu, 0.0)
        t_relay = self.D * (1 - alpha) / r_uh_v
        delays = self.D / r_vu + t_lu + t_relay + t_hu
        e_comp = np.bincount(self.assoc, c.kappa * self.W * alpha * f_lu ** 2, minlength=self.n_u)
        e_tr = np.bincount(self.assoc, c.p_luav * t_relay, minlength=self.n_u)
        e_flight = 0.5 * c.mass_luav * sq_dist(luav, self.prev_luav) / c.slot_len
        late = np.maximum(delays - self.tau, 0.0)
        penalty = float(self.rho @ late)
        obj = self.k * delays.sum() + float(self.queues @ (e_comp + e_tr + e_flight)) + penalty
        return Breakdown(delays, e_comp, e_tr, e_flight, penalty, float(obj), r_vu, r_uh)


def surrogate_parts(phi_k, bandwidth, tx_power, gamma0, n0, gap_sq):
    """Rate and its phi-derivative at the expansion point (vectorised)."""
    snr_num = tx_power * gamma0 / (n0 * bandwidth)
    x = gap_sq + phi_k
    rate = bandwidth * np.log2(1.0 + snr_num / x)
    slope = -bandwidth * snr_num * LOG2E / (x * (x + snr_num))
    return rate, slope
