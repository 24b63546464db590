import io

import numpy as np
import pytest

from uavmec.config import ScenarioConfig
from uavmec.scenario import (ScenarioStream, associate, init_scenario, read_snapshots, spawn_tasks,
                             step_vehicles, write_snapshots)


def test_initial_positions(cfg):
    np.testing.assert_array_equal(cfg.luav_positions,
                                  [(250, 250), (750, 250), (750, 750), (250, 750)])
    assert tuple(cfg.huav_position) == (500.0, 500.0)
    st = init_scenario(cfg, 0)
    assert st.positions.shape == (cfg.n_vehicles, 2)
    assert np.all((st.positions >= 0) & (st.positions <= cfg.field_size))


def test_speed_bounds_after_init():
    st = init_scenario(ScenarioConfig(n_vehicles=5000), 1)
    assert st.speeds.min() >= 30 / 3.6 and st.speeds.max() <= 80 / 3.6
    assert 8.33 <= st.speeds.min() and st.speeds.max() <= 22.23


def test_same_seed_same_state(cfg):
    a, b = init_scenario(cfg, 9), init_scenario(cfg, 9)
    np.testing.assert_array_equal(a.positions, b.positions)
    np.testing.assert_array_equal(a.velocities, b.velocities)
    np.testing.assert_array_equal(spawn_tasks(a)[0], spawn_tasks(b)[0])


def one_vehicle(cfg, pos, vel):
    st = init_scenario(cfg.with_(n_vehicles=1), 0)
    return type(st)(st.config, np.array([pos], dtype=float), np.array([vel], dtype=float), st.task_rng)


def test_reflection_example(cfg):
    st = step_vehicles(one_vehicle(cfg, (999.0, 500.0), (20.0, 0.0)), 0.2)
    np.testing.assert_allclose(st.positions[0], [997.0, 500.0], atol=1e-12)
    np.testing.assert_array_equal(st.velocities[0], [-20.0, 0.0])


def test_zero_time_unchanged(cfg):
    st = init_scenario(cfg, 3)
    assert step_vehicles(st, 0.0) is st


def test_reflection_preserves_speed_and_field(cfg):
    st = init_scenario(cfg.with_(n_vehicles=200), 4)
    speeds = st.speeds
    for _ in range(2000):
        st = step_vehicles(st, cfg.slot_len)
        assert np.all((st.positions >= 0) & (st.positions <= cfg.field_size))
    np.testing.assert_allclose(st.speeds, speeds, rtol=0, atol=1e-12)
    # a huge step bounces several times and still lands inside
    far = step_vehicles(one_vehicle(cfg, (10.0, 10.0), (2500.0, -30.0)), 1.0)
    np.testing.assert_allclose(far.positions[0], [510.0, 20.0], atol=1e-9)
    np.testing.assert_allclose(far.velocities[0], [2500.0, 30.0])


def test_task_ranges_over_many_draws():
    st = init_scenario(ScenarioConfig(n_vehicles=10_000), 2)
    data, dens, dl = spawn_tasks(st)
    assert np.all((data >= 1e6) & (data <= 1e7))
    assert np.all((dens >= 10) & (dens <= 100))
    assert np.all((dl >= 0.05) & (dl <= 0.2))
    assert dl.max() <= ScenarioConfig().slot_len


@pytest.mark.parametrize("pos,u", [((100, 100), 0), ((750.1, 250), 1), ((900, 900), 2),
                                   ((100, 900), 3), ((500, 200), 0), ((500, 500), 0),
                                   ((800, 500), 1), ((500, 800), 2)])
def test_association_examples(cfg, pos, u):
    assert associate([pos], cfg)[0] == u


def test_association_partition(cfg):
    pos = np.random.default_rng(0).uniform(0, 1000, size=(5000, 2))
    a = associate(pos, cfg)
    assert np.bincount(a, minlength=4).sum() == 5000
    centres = np.array(cfg.luav_positions)
    assert np.all(np.abs(pos - centres[a]) <= cfg.service_half_width)


def test_snapshot_jsonl_round_trip(cfg):
    stream = ScenarioStream(cfg, 6)
    snaps = [stream.next_snapshot(cfg.luav_positions, cfg.huav_position) for _ in range(3)]
    buf = io.StringIO()
    write_snapshots(snaps, buf)
    back = list(read_snapshots(io.StringIO(buf.getvalue())))
    assert len(back) == 3
    for a, b in zip(snaps, back):
        assert a.to_json() == b.to_json()
        np.testing.assert_array_equal(a.vehicle_positions, b.vehicle_positions)


def test_streams_independent_of_decisions(cfg):
    a, b = ScenarioStream(cfg, 8), ScenarioStream(cfg, 8)
    for _ in range(3):
        sa = a.next_snapshot(cfg.luav_positions, cfg.huav_position)
        sb = b.next_snapshot([(0, 0)] * 4, (10, 10))
        np.testing.assert_array_equal(sa.vehicle_positions, sb.vehicle_positions)
        np.testing.assert_array_equal(sa.data_bits, sb.data_bits)
