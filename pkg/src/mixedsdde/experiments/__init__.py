"""Monte Carlo studies and their command-line front end."""

from .config import ConfigError, ProblemSpec, StudyConfig, config_from_dict, load_config
from .studies import (
    StudyResult,
    recompute,
    run_convergence_study,
    run_moment_study,
    run_norm_study,
    run_stability_study,
    run_study,
    run_uniqueness_check,
    summarize,
)

__all__ = [
    "ConfigError", "ProblemSpec", "StudyConfig", "StudyResult", "config_from_dict", "load_config",
    "recompute", "run_convergence_study", "run_moment_study", "run_norm_study", "run_stability_study",
    "run_study", "run_uniqueness_check", "summarize",
]
