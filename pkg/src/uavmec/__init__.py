"""Multi-tier UAV edge computing: Lyapunov-BCD slot optimiser and baselines."""

from .baselines import diagonal_path, method_spec, run_ft_mtuec, run_hura, run_utdc
from .config import ConfigError, ExperimentConfig, ScenarioConfig, config_from_dict, parse_config
from .harness import run_experiment
from .problem import BackupLink, SlotProblem
from .queues import EnergyDeviationQueue, update_queue
from .scenario import ScenarioStream, SlotSnapshot
from .scheduler import SlotMetrics, compute_dedr, mtuec_spec, run_horizon, run_slot
from .solver import ConvexProgram, SolverError, bisect, solve
from .trajectory import surrogate_rate

__all__ = [
    "BackupLink", "ConfigError", "ConvexProgram", "EnergyDeviationQueue", "ExperimentConfig",
    "ScenarioConfig", "ScenarioStream", "SlotMetrics", "SlotProblem", "SlotSnapshot",
    "SolverError", "bisect", "compute_dedr", "config_from_dict", "diagonal_path",
    "method_spec", "mtuec_spec", "parse_config", "run_experiment", "run_ft_mtuec", "run_horizon",
    "run_hura", "run_slot", "run_utdc", "solve", "surrogate_rate", "update_queue",
]
