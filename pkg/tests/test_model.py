import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from uavmec.config import ScenarioConfig, db_to_linear, dbm_to_watt, linear_to_db, watt_to_dbm
from uavmec.model import (Task, channel_gain_lu2hu, channel_gain_v2lu, flight_energy, link_rate,
                          luav_energy_components, task_delay_components, task_delays)

CFG = ScenarioConfig()
RADIO = CFG.radio
COMPUTE = CFG.compute


def test_v2lu_gain_directly_below():
    assert channel_gain_v2lu((250, 250), (250, 250), RADIO) == pytest.approx(1e-9, rel=1e-12)


def test_v2lu_gain_offset_100m():
    assert channel_gain_v2lu((350, 250), (250, 250), RADIO) == pytest.approx(5e-10, rel=1e-12)


def test_v2lu_gain_decreases_with_offset():
    assert channel_gain_v2lu((0, 0), (0, 0), RADIO) > channel_gain_v2lu((10, 0), (0, 0), RADIO)


def test_lu2hu_gain_examples():
    assert channel_gain_lu2hu((500, 500), (500, 500), RADIO) == pytest.approx(4e-9, rel=1e-12)
    assert channel_gain_lu2hu((550, 500), (500, 500), RADIO) == pytest.approx(2e-9, rel=1e-12)


def test_link_rate_examples():
    n0 = 3.981e-21
    assert link_rate(2e6, 0.5, 1e-9, n0) == pytest.approx(2e6 * math.log2(1 + 0.5e-9 / (n0 * 2e6)))
    assert link_rate(2e6, 0.5, 1e-9, n0) == pytest.approx(3.19e7, rel=2e-3)
    assert link_rate(10e6, 1.0, 4e-9, n0) == pytest.approx(1.66e8, rel=3e-3)
    # gain -> 0+ gives rate -> 0+
    assert 0 < link_rate(2e6, 0.5, 1e-24, n0) < link_rate(2e6, 0.5, 1e-21, n0) < link_rate(2e6, 0.5, 1e-15, n0)
    assert link_rate(2e6, 0.5, 1e-24, n0) < 1.0


def test_delay_components_examples():
    task = Task(8e6, 50, 0.2)
    _, t_lu, _, _ = task_delay_components(task, 0.5, 5e9, 1e10, 1e7, 1e8)
    assert t_lu == pytest.approx(0.04)
    _, _, t_tr, t_hu = task_delay_components(task, 1.0, 5e9, 1e10, 1e7, 1e8)
    assert t_tr == 0 and t_hu == 0
    _, t_lu, _, _ = task_delay_components(task, 0.0, 0.0, 1e10, 1e7, 1e8)
    assert t_lu == 0


def test_energy_examples():
    task = Task(8e6, 50, 0.2)
    e_comp, _ = luav_energy_components(task, 0.5, 5e9, 0.0, COMPUTE, RADIO)
    assert e_comp == pytest.approx(5.0)
    _, e_tr = luav_energy_components(task, 1.0, 5e9, 0.0, COMPUTE, RADIO)
    assert e_tr == 0
    _, e_tr = luav_energy_components(task, 0.5, 5e9, 0.01, COMPUTE, RADIO)
    assert e_tr == pytest.approx(0.01)


def test_flight_energy_examples():
    assert flight_energy((0, 0), (3, 0), COMPUTE) == pytest.approx(90.0)
    assert flight_energy((1, 2), (1, 2), COMPUTE) == 0.0
    assert flight_energy((0, 0), (1.5, 0), COMPUTE) == pytest.approx(90.0 / 4)


def test_gain_positive_and_monotone_sampled():
    rng = np.random.default_rng(0)
    a = rng.uniform(0, 1000, size=(1000, 2))
    b = rng.uniform(0, 1000, size=(1000, 2))
    g = channel_gain_v2lu(a, b, RADIO)
    assert np.all(g > 0)
    farther = a + (a - b) * 0.5  # same direction, larger offset
    assert np.all(channel_gain_v2lu(farther, b, RADIO) <= g)


def test_rate_concave_in_gain():
    g = np.logspace(-14, -6, 200)
    r = link_rate(2e6, 0.5, g, CFG.n0)
    # concavity on a uniform grid: second differences on linear spacing
    g_lin = np.linspace(1e-12, 1e-8, 200)
    r_lin = link_rate(2e6, 0.5, g_lin, CFG.n0)
    assert np.all(np.diff(r) > 0)
    assert np.all(np.diff(r_lin, 2) <= 1e-9 * r_lin.max())


@settings(max_examples=200, deadline=None)
@given(d=st.floats(1e6, 1e7), c=st.floats(10, 100), a=st.floats(0, 1),
       f_lu=st.floats(1e8, 1e10), f_hu=st.floats(1e8, 5e10),
       r1=st.floats(1e6, 1e8), r2=st.floats(1e6, 2e8))
def test_delay_parts_sum_and_nonnegative(d, c, a, f_lu, f_hu, r1, r2):
    task = Task(d, c, 0.2)
    parts = task_delay_components(task, a, f_lu, f_hu, r1, r2)
    total = task_delays(d, d * c, a, f_lu, f_hu, r1, r2)
    assert all(p >= 0 for p in parts)
    assert sum(parts) == pytest.approx(float(total), rel=1e-12)
    e_comp, e_tr = luav_energy_components(task, a, f_lu, parts[2], COMPUTE, RADIO)
    assert e_comp >= 0 and e_tr >= 0


@settings(max_examples=200, deadline=None)
@given(x=st.floats(1e-20, 1e6))
def test_db_round_trip(x):
    assert db_to_linear(linear_to_db(x)) == pytest.approx(x, rel=1e-12)
    assert dbm_to_watt(watt_to_dbm(x)) == pytest.approx(x, rel=1e-12)


def test_task_rejects_nonpositive():
    with pytest.raises(ValueError):
        Task(0, 10, 0.1)
