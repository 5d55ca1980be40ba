"""
Deterministic decision processes: grid mazes and full/needle trees
"""

from .base import DecisionProcess
from .maze import (
    Action,
    MazeInstance,
    MazeEnv,
    bfs_distances,
    maze_generate,
    maze_step,
    maze_gt_q
)
from .tree import (
    FullTree,
    NeedleTree,
    enumerate_edges,
    uniform_prior,
    concentrated_prior,
    needle_tree
)

__all__ = [
    'DecisionProcess',
    'Action',
    'MazeInstance',
    'MazeEnv',
    'bfs_distances',
    'maze_generate',
    'maze_step',
    'maze_gt_q',
    'FullTree',
    'NeedleTree',
    'enumerate_edges',
    'uniform_prior',
    'concentrated_prior',
    'needle_tree'
]
