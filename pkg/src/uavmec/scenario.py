"""Vehicle population, mobility, task arrivals and L-UAV association.

The scenario stream depends only on the configuration and the seed, never on
the decisions of the optimiser, so every method sees identical vehicles and
tasks for a given seed.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, replace
from typing import IO, Iterable, Iterator

import numpy as np

from .config import ScenarioConfig
from .model import Task


@dataclass(frozen=True)
class SlotSnapshot:
    slot_index: int
    vehicle_ids: np.ndarray
    vehicle_positions: np.ndarray  # (V, 2)
    vehicle_velocities: np.ndarray  # (V, 2) m/s
    data_bits: np.ndarray
    density: np.ndarray
    deadline: np.ndarray
    association: np.ndarray  # (V,) L-UAV index
    luav_positions: np.ndarray  # (U, 2), positions entering the slot
    huav_position: np.ndarray  # (2,)

    @property
    def n_vehicles(self) -> int:
        return int(self.vehicle_ids.size)

    @property
    def workload(self) -> np.ndarray:
        return self.data_bits * self.density

    @property
    def tasks(self) -> list[Task]:
        return [Task(float(d), float(c), float(t), int(i)) for d, c, t, i in
                zip(self.data_bits, self.density, self.deadline, self.vehicle_ids)]

    def with_positions(self, luav_positions, huav_position) -> "SlotSnapshot":
        return replace(self, luav_positions=np.array(luav_positions, dtype=float),
                       huav_position=np.array(huav_position, dtype=float))

    def to_json(self) -> str:
        doc = {
            "slot_index": self.slot_index,
            "vehicle_ids": self.vehicle_ids.tolist(),
            "vehicle_positions": self.vehicle_positions.tolist(),
            "vehicle_velocities": self.vehicle_velocities.tolist(),
            "data_bits": self.data_bits.tolist(),
            "density": self.density.tolist(),
            "deadline": self.deadline.tolist(),
            "association": self.association.tolist(),
            "luav_positions": self.luav_positions.tolist(),
            "huav_position": self.huav_position.tolist(),
        }
        return json.dumps(doc, sort_keys=True)

    @classmethod
    def from_json(cls, line: str) -> "SlotSnapshot":
        doc = json.loads(line)
        v = len(doc["vehicle_ids"])
        return cls(
            slot_index=int(doc["slot_index"]),
            vehicle_ids=np.array(doc["vehicle_ids"], dtype=int),
            vehicle_positions=np.array(doc["vehicle_positions"], dtype=float).reshape(v, 2),
            vehicle_velocities=np.array(doc["vehicle_velocities"], dtype=float).reshape(v, 2),
            data_bits=np.array(doc["data_bits"], dtype=float),
            density=np.array(doc["density"], dtype=float),
            deadline=np.array(doc["deadline"], dtype=float),
            association=np.array(doc["association"], dtype=int),
            luav_positions=np.array(doc["luav_positions"], dtype=float),
            huav_position=np.array(doc["huav_position"], dtype=float),
        )


def write_snapshots(snapshots: Iterable[SlotSnapshot], fh: IO[str]) -> None:
    for snap in snapshots:
        fh.write(snap.to_json() + "\n")


def read_snapshots(fh: IO[str]) -> Iterator[SlotSnapshot]:
    for line in fh:
        if line.strip():
            yield SlotSnapshot.from_json(line)


@dataclass
class ScenarioState:
    config: ScenarioConfig
    positions: np.ndarray
    velocities: np.ndarray
    task_rng: np.random.Generator
    slot_index: int = 0

    @property
    def speeds(self) -> np.ndarray:
        return np.hypot(self.velocities[:, 0], self.velocities[:, 1])


def init_scenario(config: ScenarioConfig, seed: int) -> ScenarioState:
    """Uniform vehicle placement with uniform speed and heading."""
    mob_seq, task_seq = np.random.SeedSequence(seed).spawn(2)
    rng = np.random.default_rng(mob_seq)
    v = config.n_vehicles
    positions = rng.uniform(0.0, config.field_size, size=(v, 2))
    speed = rng.uniform(*config.vehicle_speed_range, size=v)
    heading = rng.uniform(0.0, 2 * np.pi, size=v)
    velocities = np.column_stack([speed * np.cos(heading), speed * np.sin(heading)])
    return ScenarioState(config, positions, velocities, np.random.default_rng(task_seq))


def _reflect(pos, vel, size):
    # fold positions back into [0, size]; handles several bounces per step
    period = 2.0 * size
    p = np.mod(pos, period)
    flipped = p > size
    p = np.where(flipped, period - p, p)
    n_bounces = np.floor_divide(pos, size).astype(int)
    v = np.where(n_bounces % 2 == 1, -vel, vel)
    return p, v


def step_vehicles(state: ScenarioState, dt: float) -> ScenarioState:
    """Advance every vehicle by ``velocity * dt`` with specular wall reflection."""
    if dt == 0:
        return state
    raw = state.positions + state.velocities * dt
    pos, vel = _reflect(raw, state.velocities, state.config.field_size)
    return replace(state, positions=pos, velocities=vel, slot_index=state.slot_index + 1)


def spawn_tasks(state: ScenarioState) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
    """One task per vehicle: (data bits, cycles/bit, deadline s), uniform draws."""
    cfg = state.config
    v = state.positions.shape[0]
    rng = state.task_rng
    data = rng.uniform(*cfg.data_bits_range, size=v)
    density = rng.uniform(*cfg.density_range, size=v)
    deadline = rng.uniform(*cfg.deadline_range, size=v)
    return data, density, deadline


def associate(positions, config: ScenarioConfig) -> np.ndarray:
    """Index of the static service square containing each vehicle.

    Squares are closed, so points on a shared edge match several; the lowest
    L-UAV index wins.  A vehicle outside every square goes to the nearest
    square centre.
    """
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    centres = np.asarray(config.luav_positions, dtype=float)
    half = config.service_half_width
    inside = np.all(np.abs(positions[:, None, :] - centres[None, :, :]) <= half, axis=2)
    nearest = np.argmin(np.sum((positions[:, None, :] - centres[None, :, :]) ** 2, axis=2), axis=1)
    first = np.argmax(inside, axis=1)
    return np.where(inside.any(axis=1), first, nearest)


class ScenarioStream:
    """Iterates slot snapshots (vehicles and tasks) for one seed."""

    def __init__(self, config: ScenarioConfig, seed: int):
        self.config = config
        self.state = init_scenario(config, seed)

    def next_snapshot(self, luav_positions, huav_position) -> SlotSnapshot:
        st = self.state
        data, density, deadline = spawn_tasks(st)
        snap = SlotSnapshot(
            slot_index=st.slot_index,
            vehicle_ids=np.arange(st.positions.shape[0]),
            vehicle_positions=st.positions.copy(),
            vehicle_velocities=st.velocities.copy(),
            data_bits=data,
            density=density,
            deadline=deadline,
            association=associate(st.positions, self.config),
            luav_positions=np.array(luav_positions, dtype=float),
            huav_position=np.array(huav_position, dtype=float),
        )
        self.state = step_vehicles(st, self.config.slot_len)
        return snap
