"""Configuration, orchestration, persistence and the command line."""
from .checkpoint import Checkpoint, CheckpointError, checkpoint_read, checkpoint_write
from .config import ConfigError, RunConfig, load_config, parse_config
from .run import diagnose, initial_field, load_series, run, scatter

__all__ = [
    "Checkpoint",
    "CheckpointError",
    "ConfigError",
    "RunConfig",
    "checkpoint_read",
    "checkpoint_write",
    "diagnose",
    "initial_field",
    "load_config",
    "load_series",
    "parse_config",
    "run",
    "scatter",
]
