"""Configuration keys and metric columns, with units.

``CONFIG_SCHEMA`` drives validation in :mod:`uavmec.config`;
``describe()`` renders both tables as JSON for the ``schema`` CLI command.
"""

from __future__ import annotations

import math

METHODS = ("mtuec", "ft-mtuec", "hura", "utdc")


def _db(x):
    return 10.0 ** (x / 10.0)


def _dbm(x):
    return 10.0 ** ((x - 30.0) / 10.0)


def _scaled(k):
    return lambda v: tuple(float(x) * k for x in v) if isinstance(v, list) else float(v) * k


def _pos(spec, **kw):
    return dict(spec, min=0.0, exclusive_min=True, **kw)


_NUM = {"type": "number"}
_INT = {"type": "integer"}

CONFIG_SCHEMA: dict[str, dict] = {
    # geometry and population
    "field_size": _pos(_NUM, target=("scenario", "field_size"), unit="m", default=1000),
    "n_vehicles": dict(_INT, min=0, target=("scenario", "n_vehicles"), unit="count", default=20),
    "luav_positions": dict(type="points", target=("scenario", "luav_positions"), unit="m",
                           default=[[250, 250], [750, 250], [750, 750], [250, 750]]),
    "service_half_width": _pos(_NUM, target=("scenario", "service_half_width"), unit="m", default=250),
    "huav_position": dict(type="point", target=("scenario", "huav_position"), unit="m", default=[500, 500]),
    "vehicle_speed_kmh": dict(type="range", min=0.0, target=("scenario", "vehicle_speed_range"),
                              unit="km/h", default=[30, 80], convert=_scaled(1 / 3.6)),
    "data_mbits": dict(type="range", min=0.0, exclusive_min=True, target=("scenario", "data_bits_range"),
                       unit="Mb (1e6 bits)", default=[1, 10], convert=_scaled(1e6)),
    "density_cycles_per_bit": dict(type="range", min=0.0, exclusive_min=True,
                                   target=("scenario", "density_range"), unit="cycles/bit",
                                   default=[10, 100]),
    "deadline_ms": dict(type="range", min=0.0, exclusive_min=True, target=("scenario", "deadline_range"),
                        unit="ms", default=[50, 200], convert=_scaled(1e-3)),
    # radio
    "gamma0_db": dict(_NUM, target=("scenario", "gamma0"), unit="dB", default=-50, convert=_db),
    "n0_dbm_per_hz": dict(_NUM, target=("scenario", "n0"), unit="dBm/Hz", default=-174, convert=_dbm),
    "b_v2lu_hz": _pos(_NUM, target=("scenario", "b_v2lu"), unit="Hz", default=2e6),
    "b_lu2hu_hz": _pos(_NUM, target=("scenario", "b_lu2hu"), unit="Hz", default=10e6),
    "p_vehicle_w": _pos(_NUM, target=("scenario", "p_vehicle"), unit="W", default=0.5),
    "p_luav_w": _pos(_NUM, target=("scenario", "p_luav"), unit="W", default=1.0),
    "h1_m": _pos(_NUM, target=("scenario", "h1"), unit="m", default=100),
    "h2_m": _pos(_NUM, target=("scenario", "h2"), unit="m", default=150),
    # compute and energy
    "f_luav_cap_hz": _pos(_NUM, target=("scenario", "f_luav_cap"), unit="Hz", default=10e9),
    "f_huav_cap_hz": _pos(_NUM, target=("scenario", "f_huav_cap"), unit="Hz", default=50e9),
    "kappa": _pos(_NUM, target=("scenario", "kappa"), unit="J s^2/cycle^3", default=1e-27),
    "mass_luav_kg": _pos(_NUM, target=("scenario", "mass_luav"), unit="kg", default=4),
    "slot_len_s": _pos(_NUM, target=("scenario", "slot_len"), unit="s", default=0.2),
    "e_quota": _pos(_NUM, target=("scenario", "e_quota"), unit="J", default=4.5),
    "s_luav_max": _pos(_NUM, target=("scenario", "s_luav_max"), unit="m/s", default=15),
    "s_huav_max": _pos(_NUM, target=("scenario", "s_huav_max"), unit="m/s", default=15),
    # optimisation
    "k_penalty": _pos(_NUM, target=("scenario", "k_penalty"), unit="1", default=50),
    "init_alpha": dict(_NUM, min=0.0, max=1.0, target=("scenario", "init_alpha"), unit="1", default=0.5),
    "deadline_penalty": dict(_NUM, min=0.0, target=("scenario", "deadline_penalty"),
                             unit="x K per s", default=1e3),
    "relaxed_deadline_penalty": dict(_NUM, min=0.0, target=("scenario", "relaxed_deadline_penalty"),
                                     unit="x K per s", default=50.0),
    "dedr_epsilon": _pos(_NUM, target=("scenario", "dedr_epsilon"), unit="J", default=0.01),
    "solver_tol": _pos(_NUM, target=("scenario", "solver_tol"), unit="1", default=1e-7),
    "sp1_rel_tol": _pos(_NUM, target=("scenario", "sp1_rel_tol"), unit="1", default=1e-4),
    "sp1_max_iter": dict(_INT, min=1, target=("scenario", "sp1_max_iter"), unit="count", default=20),
    "sca_rel_tol": _pos(_NUM, target=("scenario", "sca_rel_tol"), unit="1", default=1e-4),
    "sca_max_iter": dict(_INT, min=1, target=("scenario", "sca_max_iter"), unit="count", default=15),
    "trust_radius_m": _pos(_NUM, target=("scenario", "trust_radius"), unit="m", default=50),
    "bcd_rel_tol": _pos(_NUM, target=("scenario", "bcd_rel_tol"), unit="1", default=1e-3),
    "bcd_max_iter": dict(_INT, min=1, target=("scenario", "bcd_max_iter"), unit="count", default=10),
    # baselines
    "hap_altitude_m": _pos(_NUM, target=("scenario", "hap_altitude"), unit="m", default=20000),
    "bs_position": dict(type="point", target=("scenario", "bs_position"), unit="m", default=[500, 500]),
    # experiment
    "methods": dict(type="str_list", choices=set(METHODS) | {"all"}, target=("experiment", "methods"),
                    unit="", default=["mtuec"]),
    "n_slots": dict(_INT, min=1, target=("experiment", "n_slots"), unit="count", default=200),
    "vehicles": dict(type="int_list", target=("experiment", "vehicles"), unit="count", default=[20]),
    "seeds": dict(type="int_list", target=("experiment", "seeds"), unit="", default=list(range(10))),
    "workers": dict(_INT, min=1, target=("experiment", "workers"), unit="count", default=1),
    "out_dir": dict(type="string", target=("experiment", "out_dir"), unit="path", default="results"),
    "emit": dict(type="str_list", choices={"csv", "json"}, target=("experiment", "emit"),
                 unit="", default=["csv", "json"]),
}

# Per-slot CSV columns.  ``{u}`` columns repeat for every L-UAV index.
CSV_FIXED = [
    ("method", "", "method name"),
    ("seed", "", "scenario seed"),
    ("n_vehicles", "count", "vehicles in the run"),
    ("slot", "", "slot index n"),
    ("mean_task_delay", "s", "average task execution delay in the slot"),
    ("total_delay", "s", "sum of task delays T(n)"),
    ("deadline_violations", "count", "tasks finishing after their deadline"),
    ("mean_violation", "s", "average lateness of violating tasks (0 if none)"),
    ("e_comp_total", "J", "L-UAV computing energy summed over L-UAVs"),
    ("e_tr_total", "J", "L-UAV relay transmission energy summed over L-UAVs"),
    ("e_flight_total", "J", "L-UAV flight energy summed over L-UAVs"),
    ("mean_queue", "J", "mean energy deviation queue after the slot update"),
    ("dedr", "s/J", "mean_task_delay / (mean_queue + epsilon)"),
    ("objective", "", "final per-slot drift-plus-penalty objective"),
    ("bcd_iterations", "count", "block-descent iterations used"),
    ("huav_x", "m", "backup server x after the slot"),
    ("huav_y", "m", "backup server y after the slot"),
    ("flagged", "", "1 if a fallback or infeasibility flag was raised"),
]
CSV_PER_LUAV = [
    ("e_comp_{u}", "J", "computing energy of L-UAV u"),
    ("e_tr_{u}", "J", "relay transmission energy of L-UAV u"),
    ("e_flight_{u}", "J", "flight energy of L-UAV u"),
    ("queue_{u}", "J", "queue Q_u after the slot update"),
    ("x_{u}", "m", "L-UAV u position after the slot"),
    ("y_{u}", "m", "L-UAV u position after the slot"),
]


def csv_columns(n_luav: int) -> list[str]:
    cols = [name for name, _, _ in CSV_FIXED]
    for u in range(n_luav):
        cols += [name.format(u=u) for name, _, _ in CSV_PER_LUAV]
    return cols


def describe() -> dict:
    config = {
        k: {"type": v["type"], "unit": v["unit"], "default": v["default"],
            **({"min": v["min"]} if "min" in v and math.isfinite(v["min"]) else {})}
        for k, v in CONFIG_SCHEMA.items()
    }
    columns = [{"name": n, "unit": u, "description": d} for n, u, d in CSV_FIXED + CSV_PER_LUAV]
    return {"config": config, "csv_columns": columns}
