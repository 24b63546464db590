import dataclasses

import numpy as np
import pytest

from uavmec.baselines import (diagonal_path, ft_mtuec_spec, hura_spec, method_spec, run_hura,
                              run_utdc, utdc_spec)
from uavmec.config import ConfigError
from uavmec.problem import SlotProblem
from uavmec.scheduler import mtuec_spec, run_horizon

from conftest import make_snapshot


def test_diagonal_path_on_segment_with_fixed_steps(cfg):
    path = diagonal_path(cfg)
    pts = np.array([path(n) for n in range(1200)])
    assert np.all(np.abs(pts[:, 0] - pts[:, 1]) <= 1e-9)
    assert np.all((pts >= -1e-9) & (pts <= cfg.field_size + 1e-9))
    steps = np.linalg.norm(np.diff(pts, axis=0), axis=1)
    step = cfg.s_huav_max * cfg.slot_len
    assert np.all(steps <= step + 1e-9)
    # only turnaround slots are shorter
    short = np.flatnonzero(steps < step - 1e-9)
    ends = np.minimum(np.linalg.norm(pts, axis=1),
                      np.linalg.norm(pts - cfg.field_size, axis=1))
    assert short.size >= 2
    assert np.all(np.minimum(ends[short], ends[short + 1]) < step)
    np.testing.assert_allclose(pts[0], [500 + step / np.sqrt(2)] * 2)


def test_ft_differs_from_mtuec_only_in_backup_block(cfg):
    ft, mt = ft_mtuec_spec(cfg), mtuec_spec(cfg)
    same = {f.name for f in dataclasses.fields(mt)} - {"name", "move_backup", "backup_path"}
    assert all(getattr(ft, k) == getattr(mt, k) for k in same)
    assert not ft.move_backup and ft.backup_path is not None


def test_ft_positions_follow_path(cfg):
    c = cfg.with_(n_vehicles=6)
    out = run_horizon(c, 5, 0, ft_mtuec_spec(c))
    path = diagonal_path(c)
    for n, m in enumerate(out):
        np.testing.assert_array_equal(m.huav, path(n))


def test_hura_respects_per_slot_energy_cap(cfg):
    out = run_hura(cfg, 10, seed=0)
    for m in out:
        assert m.flagged or np.all(m.energy <= cfg.e_quota + 1e-6)
        np.testing.assert_array_equal(m.luav, np.array(cfg.luav_positions))
        assert np.all(m.e_flight == 0)
    assert sum(m.flagged for m in out) == 0


def test_hap_gain_far_below_huav_gain(cfg):
    spec = hura_spec(cfg)
    snap = make_snapshot(cfg, [(250.0, 250.0)], 5e6, 40, 0.2, huav=(500.0, 500.0))
    hap = SlotProblem(cfg, snap, spec.backup, np.zeros(4), 50.0)
    mt = SlotProblem(cfg, snap, mtuec_spec(cfg).backup, np.zeros(4), 50.0)
    _, r_hap = hap.rates(hap.prev_luav, hap.prev_backup)
    _, r_mt = mt.rates(mt.prev_luav, mt.prev_backup)
    d2 = 2 * 250.0 ** 2
    assert spec.backup.altitude_gap_sq == pytest.approx((20000 - 100) ** 2)
    gain_hap = cfg.gamma0 / ((20000 - 100) ** 2 + d2)
    gain_h = cfg.gamma0 / (50 ** 2 + d2)
    assert gain_h / gain_hap > 1e3
    assert np.all(r_hap < 0.1 * r_mt)


def test_utdc_ignores_energy_quota(cfg):
    c = cfg.with_(n_vehicles=8)
    a = run_utdc(c, 4, seed=1)
    b = run_utdc(c.with_(e_quota=2 * c.e_quota), 4, seed=1)
    for x, y in zip(a, b):
        assert x.objective == y.objective and x.mean_task_delay == y.mean_task_delay
        np.testing.assert_array_equal(x.energy, y.energy)
        np.testing.assert_array_equal(x.luav, y.luav)


def test_utdc_backup_is_ground_station(cfg):
    spec = utdc_spec(cfg)
    assert spec.backup.altitude_gap_sq == cfg.h1 ** 2
    assert not spec.move_backup and not spec.queue_weighted


def test_utdc_cumulative_deviation_grows(cfg):
    out = run_utdc(cfg, 60, seed=0)
    excess = np.array([np.maximum(m.energy - cfg.e_quota, 0).sum() for m in out])
    cum = np.cumsum(excess)
    assert np.all(np.diff(cum) >= 0)
    assert np.all(excess[10:] > 0)  # strictly increasing once the overshoot persists
    q = np.array([m.queue.mean() for m in out])
    assert np.all(np.diff(q[10:]) > 0)


def test_hura_transmits_more_than_mtuec(cfg):
    hura = np.mean([m.e_tr.mean() for m in run_hura(cfg, 40, seed=0)])
    mt = np.mean([m.e_tr.mean() for m in run_horizon(cfg, 40, seed=0)])
    assert hura >= 2 * mt


def test_unknown_method(cfg):
    with pytest.raises(ConfigError):
        method_spec("nope", cfg)
