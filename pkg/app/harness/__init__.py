"""
Online episodes, regret measurement, bound checks and experiment specs
"""

from .models import EpisodeResult, PlannerEntry, ExperimentSpec, ResultRecord
from .regret import NeedleDiscovery, regret_trace, root_action
from .episode import online_episode
from .bound_check import BoundReport, bound_check, regret_bound
from .spec_loader import (
    load_experiment_spec,
    load_experiment_text,
    parse_env_seeds,
    parse_int_list
)
from .calibration import greedy_success_rate, tune_error_scale

__all__ = [
    'EpisodeResult',
    'PlannerEntry',
    'ExperimentSpec',
    'ResultRecord',
    'NeedleDiscovery',
    'regret_trace',
    'root_action',
    'online_episode',
    'BoundReport',
    'bound_check',
    'regret_bound',
    'load_experiment_spec',
    'load_experiment_text',
    'parse_env_seeds',
    'parse_int_list',
    'greedy_success_rate',
    'tune_error_scale'
]
