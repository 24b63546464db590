"""Closed-form physics of the three-tier network: LoS gains, OFDMA rates,
per-task delays and L-UAV energies.

All functions are pure and accept numpy arrays, broadcasting over leading
dimensions; positions are ``(..., 2)`` arrays of horizontal coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .config import ComputeParams, RadioParams

LOG2E = 1.0 / np.log(2.0)


@dataclass(frozen=True)
class Task:
    data_bits: float
    density: float  # cycles per bit
    deadline: float  # s
    vehicle_id: int = 0

    def __post_init__(self):
        if not (self.data_bits > 0 and self.density > 0 and self.deadline > 0):
            raise ValueError("task data, density and deadline must be positive")

    @property
    def workload(self) -> float:
        return self.data_bits * self.density


def sq_dist(a, b):
    d = np.asarray(a, dtype=float) - np.asarray(b, dtype=float)
    return np.sum(d * d, axis=-1)


def los_gain(gamma0, altitude_gap_sq, phi):
    """LoS gain for squared horizontal distance ``phi`` and squared vertical gap."""
    return gamma0 / (altitude_gap_sq + phi)


def channel_gain_v2lu(pos_v, pos_u, radio: RadioParams):
    return los_gain(radio.gamma0, radio.h1 ** 2, sq_dist(pos_u, pos_v))


def channel_gain_lu2hu(pos_u, pos_h, radio: RadioParams):
    return los_gain(radio.gamma0, (radio.h2 - radio.h1) ** 2, sq_dist(pos_h, pos_u))


def link_rate(bandwidth, tx_power, gain, n0):
    """OFDMA link rate ``B log2(1 + P h / (N0 B))`` in bits/s."""
    return bandwidth * np.log2(1.0 + tx_power * gain / (n0 * bandwidth))


def rate_of_phi(phi, bandwidth, tx_power, gamma0, n0, altitude_gap_sq):
    """Link rate as a function of squared horizontal distance."""
    return link_rate(bandwidth, tx_power, los_gain(gamma0, altitude_gap_sq, phi), n0)


def _ratio(num, den):
    # zero workload is free even on a zero-frequency server
    num = np.asarray(num, dtype=float)
    den = np.asarray(den, dtype=float)
    if np.any((num > 0) & (den <= 0)):
        raise ZeroDivisionError("nonzero workload assigned to a zero-capacity resource")
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.where(num > 0, num / np.where(den > 0, den, 1.0), 0.0)
    return out if out.ndim else float(out)


def task_delay_components(task: Task, alpha, f_lu, f_hu, r_v2lu, r_lu2hu):
    """Return ``(t_tr_v2lu, t_comp_lu, t_tr_lu2hu, t_comp_hu)`` in seconds."""
    return _delay_parts(task.data_bits, task.workload, alpha, f_lu, f_hu, r_v2lu, r_lu2hu)


def _delay_parts(data_bits, workload, alpha, f_lu, f_hu, r_v2lu, r_lu2hu):
    alpha = np.asarray(alpha, dtype=float)
    t_tr_v2lu = _ratio(data_bits, r_v2lu)
    t_comp_lu = _ratio(workload * alpha, f_lu)
    t_tr_lu2hu = _ratio(data_bits * (1.0 - alpha), r_lu2hu)
    t_comp_hu = _ratio(workload * (1.0 - alpha), f_hu)
    return t_tr_v2lu, t_comp_lu, t_tr_lu2hu, t_comp_hu


def task_delays(data_bits, workload, alpha, f_lu, f_hu, r_v2lu, r_lu2hu):
    """Vectorised total execution delay per task."""
    parts = _delay_parts(data_bits, workload, alpha, f_lu, f_hu, r_v2lu, r_lu2hu)
    return parts[0] + parts[1] + parts[2] + parts[3]


def luav_energy_components(task: Task, alpha, f_lu, t_tr_lu2hu, compute: ComputeParams,
                           radio: RadioParams):
    """Computing and relay-transmission energy (J) an L-UAV spends on one task."""
    e_comp = compute.kappa * task.workload * alpha * f_lu ** 2
    e_tr = radio.p_luav * t_tr_lu2hu
    return e_comp, e_tr


def flight_energy(prev, nxt, compute: ComputeParams):
    """``0.5 M tau v^2`` with v the average speed over the slot."""
    speed_sq = sq_dist(nxt, prev) / compute.slot_len ** 2
    return 0.5 * compute.mass_luav * compute.slot_len * speed_sq
