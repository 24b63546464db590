"""Comparison methods built from the same slot pipeline as MTUEC.

FT-MTUEC  scripted H-UAV path along the field diagonal, everything else as MTUEC.
HURA      static high-altitude platform as backup, hard per-slot energy cap
          E_u(n) <= E_q instead of queues, delay-only objective, static L-UAVs.
UTDC      ground base station as backup, energy-blind delay objective,
          L-UAV trajectories still optimised.
"""

from __future__ import annotations

import numpy as np

from .config import ConfigError, ScenarioConfig
from .problem import BackupLink
from .scheduler import MethodSpec, mtuec_spec, run_horizon


def diagonal_path(cfg: ScenarioConfig, start=None):
    """Back-and-forth path on the segment (0,0)-(L,L) at the H-UAV top speed.

    Starts at ``start`` (default: the H-UAV initial position projected on the
    diagonal) heading towards (L, L); slot ``n`` returns the position held
    during slot ``n``.
    """
    size = cfg.field_size
    length = size * np.sqrt(2.0)
    start = np.asarray(cfg.huav_position if start is None else start, dtype=float)
    s0 = float(np.clip(start.sum() / np.sqrt(2.0), 0.0, length))
    step = cfg.s_huav_max * cfg.slot_len
    unit = np.array([1.0, 1.0]) / np.sqrt(2.0)

    def position(n: int) -> np.ndarray:
        s = np.mod(s0 + (n + 1) * step, 2 * length)
        if s > length:
            s = 2 * length - s
        return s * unit

    return position


def ft_mtuec_spec(cfg: ScenarioConfig) -> MethodSpec:
    base = mtuec_spec(cfg)
    path = diagonal_path(cfg)
    return MethodSpec("ft-mtuec", base.backup, base.backup_start, move_backup=False,
                      backup_path=path)


def hura_spec(cfg: ScenarioConfig) -> MethodSpec:
    gap = (cfg.hap_altitude - cfg.h1) ** 2
    centre = (cfg.field_size / 2, cfg.field_size / 2)
    return MethodSpec("hura", BackupLink(gap, cfg.f_huav_cap, 0.0), centre, move_luav=False,
                      move_backup=False, queue_weighted=False, energy_cap=cfg.e_quota)


def utdc_spec(cfg: ScenarioConfig) -> MethodSpec:
    return MethodSpec("utdc", BackupLink(cfg.h1 ** 2, cfg.f_huav_cap, 0.0), tuple(cfg.bs_position),
                      move_backup=False, queue_weighted=False)


SPECS = {"mtuec": mtuec_spec, "ft-mtuec": ft_mtuec_spec, "hura": hura_spec, "utdc": utdc_spec}


def method_spec(name: str, cfg: ScenarioConfig) -> MethodSpec:
    try:
        return SPECS[name](cfg)
    except KeyError:
        raise ConfigError(f"unknown method {name!r}; expected one of {sorted(SPECS)}") from None


def run_ft_mtuec(cfg: ScenarioConfig, n_slots: int, seed: int):
    return run_horizon(cfg, n_slots, seed, ft_mtuec_spec(cfg))


def run_hura(cfg: ScenarioConfig, n_slots: int, seed: int):
    return run_horizon(cfg, n_slots, seed, hura_spec(cfg))


def run_utdc(cfg: ScenarioConfig, n_slots: int, seed: int):
    return run_horizon(cfg, n_slots, seed, utdc_spec(cfg))
