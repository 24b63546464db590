import json
import re

import pytest

from uavmec.config import ENV_CONFIG, ConfigError, config_from_dict, parse_config
from uavmec.schema import CONFIG_SCHEMA, describe


def test_empty_document_gives_defaults(tmp_path):
    path = tmp_path / "c.json"
    path.write_text("{}")
    exp = parse_config(path)
    s = exp.scenario
    assert s.e_quota == 4.5 and s.slot_len == 0.2
    assert s.f_luav_cap == 10e9 and s.f_huav_cap == 50e9
    assert s.b_v2lu == 2e6 and s.b_lu2hu == 10e6
    assert s.h1 == 100 and s.h2 == 150 and s.mass_luav == 4
    assert s.kappa == 1e-27 and s.s_luav_max == 15 and s.s_huav_max == 15
    assert s.vehicle_speed_range == pytest.approx((30 / 3.6, 80 / 3.6))
    assert s.data_bits_range == (1e6, 1e7) and s.deadline_range == pytest.approx((0.05, 0.2))
    assert exp.n_slots == 200 and exp.seeds == tuple(range(10))
    path.write_text("")
    assert parse_config(path).scenario == s


def test_db_conversion_at_load():
    s = config_from_dict({"gamma0_db": -50, "n0_dbm_per_hz": -174}).scenario
    assert s.gamma0 == pytest.approx(1e-5, rel=1e-12)
    assert s.n0 == pytest.approx(3.981e-21, rel=1e-3)


@pytest.mark.parametrize("doc,where", [
    ({"e_quota": -1}, "$.e_quota"),
    ({"e_quota": 0}, "$.e_quota"),
    ({"n_slots": 2.5}, "$.n_slots"),
    ({"deadline_ms": [200, 50]}, "$.deadline_ms"),
    ({"luav_positions": [[1, 2], [3]]}, "$.luav_positions[1]"),
    ({"methods": ["mtuec", "xyz"]}, "$.methods"),
    ({"bogus": 1}, "$.bogus"),
    ({"h1_m": 200}, "$"),
])
def test_validation_errors_carry_key_path(doc, where):
    with pytest.raises(ConfigError, match="^" + re.escape(where)):
        config_from_dict(doc)


def test_malformed_json(tmp_path):
    path = tmp_path / "bad.json"
    path.write_text("{ nope")
    with pytest.raises(ConfigError, match="invalid JSON"):
        parse_config(path)


def test_env_default(tmp_path, monkeypatch):
    path = tmp_path / "c.json"
    path.write_text(json.dumps({"n_slots": 7, "methods": "all"}))
    monkeypatch.setenv(ENV_CONFIG, str(path))
    exp = parse_config()
    assert exp.n_slots == 7 and exp.methods == ("mtuec", "ft-mtuec", "hura", "utdc")
    monkeypatch.delenv(ENV_CONFIG)
    assert parse_config().n_slots == 200


def test_n_vehicles_sets_sweep():
    assert config_from_dict({"n_vehicles": 30}).vehicles == (30,)
    assert config_from_dict({"vehicles": [10, 20]}).vehicles == (10, 20)


def test_schema_describes_every_key():
    d = describe()
    assert set(d["config"]) == set(CONFIG_SCHEMA)
    assert all(v["unit"] is not None for v in d["config"].values())
    assert any(c["name"] == "dedr" for c in d["csv_columns"])
