"""
Value oracles and brute-force reference computations
"""

from .providers import (
    QueryProvider,
    CorruptedPredictor,
    GroundTruthSigmaProvider,
    FixedSigmaProvider,
    PerturbedSigmaProvider,
    TablePosteriorProvider,
    OracleSpec,
    gt_sigma_query,
    fixed_sigma_query,
    perturb_sigma,
    build_provider
)
from .reference import (
    TsDistribution,
    build_enumerated_tree,
    brute_force_ts_distribution,
    prior_entropy
)

__all__ = [
    'QueryProvider',
    'CorruptedPredictor',
    'GroundTruthSigmaProvider',
    'FixedSigmaProvider',
    'PerturbedSigmaProvider',
    'TablePosteriorProvider',
    'OracleSpec',
    'gt_sigma_query',
    'fixed_sigma_query',
    'perturb_sigma',
    'build_provider',
    'TsDistribution',
    'build_enumerated_tree',
    'brute_force_ts_distribution',
    'prior_entropy'
]
