"""
Bayesian and baseline tree-search planners
"""

from .models import (
    Algorithm,
    CommitmentKind,
    CommitmentSpec,
    PlannerConfig,
    DngNodeStat,
    SearchOutcome
)
from .selection import (
    select_tsts,
    bts_quantile_level,
    select_bts,
    bayes_ucb_level,
    select_bayes_ucb,
    bayes_uct2_scores,
    select_bayes_uct2,
    bayes_uct2_level,
    puct_prior,
    select_puct,
    dng_backup,
    sample_dng_value,
    select_dng
)
from .search import (
    make_selector,
    run_search,
    run_search_sh,
    commitment_scores,
    commit
)

__all__ = [
    'Algorithm',
    'CommitmentKind',
    'CommitmentSpec',
    'PlannerConfig',
    'DngNodeStat',
    'SearchOutcome',
    'select_tsts',
    'bts_quantile_level',
    'select_bts',
    'bayes_ucb_level',
    'select_bayes_ucb',
    'bayes_uct2_scores',
    'select_bayes_uct2',
    'bayes_uct2_level',
    'puct_prior',
    'select_puct',
    'dng_backup',
    'sample_dng_value',
    'select_dng',
    'make_selector',
    'run_search',
    'run_search_sh',
    'commitment_scores',
    'commit'
]
