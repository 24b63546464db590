"""Energy quota deviation queues and the drift-plus-penalty slot objective."""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np


@dataclass(frozen=True)
class EnergyDeviationQueue:
    values: np.ndarray
    slot_index: int = 0

    def __post_init__(self):
        v = np.asarray(self.values, dtype=float)
        if v.ndim != 1 or np.any(v < 0) or not np.all(np.isfinite(v)):
            raise ValueError("queue values must be a finite non-negative vector")
        object.__setattr__(self, "values", v)

    @classmethod
    def zeros(cls, n_luav: int) -> "EnergyDeviationQueue":
        return cls(np.zeros(n_luav))

    def __len__(self):
        return self.values.size


@dataclass(frozen=True)
class LyapunovWeights:
    k_penalty: float = 50.0

    def __post_init__(self):
        if not self.k_penalty > 0:
            raise ValueError("Lyapunov control parameter must be positive")


def update_queue(queue: EnergyDeviationQueue, e_consumed, e_quota: float) -> EnergyDeviationQueue:
    """One slot of ``Q <- max(Q + E - E_q, 0)``."""
    e = np.asarray(e_consumed, dtype=float)
    if e.shape != queue.values.shape:
        raise ValueError(f"expected {queue.values.size} energies, got shape {e.shape}")
    if np.any(e < 0):
        raise ValueError("consumed energy must be non-negative")
    return EnergyDeviationQueue(np.maximum(queue.values + e - e_quota, 0.0), queue.slot_index + 1)


def transformed_objective(weights: LyapunovWeights, total_delay: float,
                          queue: EnergyDeviationQueue, e_per_luav) -> float:
    e = np.asarray(e_per_luav, dtype=float)
    if e.shape != queue.values.shape:
        raise ValueError("energy vector length must match the number of queues")
    return weights.k_penalty * total_delay + float(queue.values @ e)
