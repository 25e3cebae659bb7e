"""Desk-scale testbed for UAV mobility management over a simulated urban
space-air-ground network: hierarchical link selection and trajectory control
with constrained reinforcement learning, plus rule-based baselines."""

from .baselines import POLICIES, PolicySpec, get_policy
from .checkpoint import load_checkpoint, save_checkpoint
from .config import (RunConfig, config_from_dict, default_config, load_config,
                     small_config, validate_config)
from .csac import CsacAgent
from .ddqn import DdqnAgent
from .env import SaginEnv
from .errors import CheckpointError, ConfigError, TrainingDivergence
from .metrics import (MetricSummary, calibrate_rate_bounds, compute_metrics,
                      read_trace)
from .scenario import World, deploy_scenario
from .trainer import Trainer, summarize_eval

__version__ = "0.1.0"

__all__ = [
    "POLICIES", "PolicySpec", "get_policy",
    "load_checkpoint", "save_checkpoint",
    "RunConfig", "config_from_dict", "default_config", "load_config",
    "small_config", "validate_config",
    "CsacAgent", "DdqnAgent", "SaginEnv",
    "CheckpointError", "ConfigError", "TrainingDivergence",
    "MetricSummary", "calibrate_rate_bounds", "compute_metrics", "read_trace",
    "World", "deploy_scenario",
    "Trainer", "summarize_eval",
    "__version__",
]
