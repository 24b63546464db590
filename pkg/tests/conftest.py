import numpy as np
import pytest

from uavmec.config import ScenarioConfig
from uavmec.problem import BackupLink, SlotProblem
from uavmec.scenario import SlotSnapshot, associate


@pytest.fixture
def cfg():
    return ScenarioConfig()


def mtuec_link(cfg):
    return BackupLink((cfg.h2 - cfg.h1) ** 2, cfg.f_huav_cap, cfg.s_huav_max)


def make_snapshot(cfg, positions, data_bits, density, deadline, luav=None, huav=None):
    positions = np.asarray(positions, dtype=float).reshape(-1, 2)
    v = positions.shape[0]
    return SlotSnapshot(
        slot_index=0,
        vehicle_ids=np.arange(v),
        vehicle_positions=positions,
        vehicle_velocities=np.zeros((v, 2)),
        data_bits=np.broadcast_to(np.asarray(data_bits, dtype=float), (v,)).copy(),
        density=np.broadcast_to(np.asarray(density, dtype=float), (v,)).copy(),
        deadline=np.broadcast_to(np.asarray(deadline, dtype=float), (v,)).copy(),
        association=associate(positions, cfg),
        luav_positions=np.array(cfg.luav_positions if luav is None else luav, dtype=float),
        huav_position=np.array(cfg.huav_position if huav is None else huav, dtype=float),
    )


def make_problem(cfg, positions, data_bits, density, deadline, queues=None, k=None,
                 luav=None, huav=None, link=None, energy_cap=None):
    snap = make_snapshot(cfg, positions, data_bits, density, deadline, luav, huav)
    q = np.zeros(cfg.n_luav) if queues is None else np.asarray(queues, dtype=float)
    return SlotProblem(cfg, snap, link or mtuec_link(cfg), q, cfg.k_penalty if k is None else k,
                       energy_cap=energy_cap)


def one_luav_cfg(**kw):
    """Single L-UAV serving the whole field from its centre."""
    return ScenarioConfig(luav_positions=((500.0, 500.0),), service_half_width=500.0, **kw)


def random_problem(rng, cfg, n_vehicles, queue_scale=0.0, k=None):
    pos = rng.uniform(0, cfg.field_size, size=(n_vehicles, 2))
    data = rng.uniform(*cfg.data_bits_range, size=n_vehicles)
    dens = rng.uniform(*cfg.density_range, size=n_vehicles)
    dl = rng.uniform(*cfg.deadline_range, size=n_vehicles)
    q = rng.uniform(0, queue_scale, size=cfg.n_luav) if queue_scale > 0 else None
    return make_problem(cfg, pos, data, dens, dl, queues=q, k=k)


# one line per acceptance criterion, repeated in the terminal summary
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in sorted(ACCEPTANCE_LINES):
            terminalreporter.write_line(line)
