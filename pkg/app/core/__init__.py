"""
Numerical kernel and search-tree structure shared by every planner
"""

from .posterior import (
    DEFAULT_BINS,
    GaussianPosterior,
    DiscreteCdfPosterior,
    PosteriorDist,
    make_gaussian,
    point_mass,
    discretize,
    max_of_independent,
    shift,
    mean_var,
    quantile,
    sample,
    sample_many,
    describe
)
from .search_tree import (
    StateRef,
    EdgeStat,
    SearchNode,
    SearchTree,
    expand,
    backup_path,
    descend,
    branch_scores,
    tree_to_dict,
    dump_tree
)

__all__ = [
    'DEFAULT_BINS',
    'GaussianPosterior',
    'DiscreteCdfPosterior',
    'PosteriorDist',
    'make_gaussian',
    'point_mass',
    'discretize',
    'max_of_independent',
    'shift',
    'mean_var',
    'quantile',
    'sample',
    'sample_many',
    'describe',
    'StateRef',
    'EdgeStat',
    'SearchNode',
    'SearchTree',
    'expand',
    'backup_path',
    'descend',
    'branch_scores',
    'tree_to_dict',
    'dump_tree'
]
