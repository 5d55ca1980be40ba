"""
Brute-force reference oracles used to validate the planners
"""
import logging
from collections import deque
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence, Tuple

import numpy as np
from scipy.special import entr

from app.core.posterior import DEFAULT_BINS, sample_many
from app.core.search_tree import SearchTree, StateRef, backup_path, expand
from app.errors import EnumerationLimitError, InvalidArgumentError

# Configure logging
logger = logging.getLogger(__name__)

MAX_ENUMERATED_LEAVES = 10_000


@dataclass
class TsDistribution:
    """Probability that each frontier edge lies on the optimal branch"""
    leaves: List[Tuple[StateRef, int]]
    probs: np.ndarray

    def as_dict(self) -> Dict[Tuple[int, ...], float]:
        """Keyed by the path of the state each leaf edge leads to"""
        return {state.path + (action,): float(p) for (state, action), p in zip(self.leaves, self.probs)}


def build_enumerated_tree(env, provider, expand_depth: Optional[int] = None,
                          bins_m: int = DEFAULT_BINS) -> SearchTree:
    """
    Expand every non-terminal state above expand_depth and back up

    Args:
        env: DecisionProcess
        provider: QueryProvider
        expand_depth: States at depth < expand_depth are expanded (default H - 1)
        bins_m: Max-backup bins

    Returns:
        SearchTree whose frontier edges all hang off depth expand_depth - 1 or terminals
    """
    depth_limit = env.horizon() - 1 if expand_depth is None else expand_depth
    depth_limit = max(1, depth_limit)
    tree = SearchTree(env.root(), env.horizon(), bins_m)
    queue = deque([tree.root_ref])
    order = []
    while queue:
        state = queue.popleft()
        node = expand(tree, state, env, provider)
        order.append(state)
        if len(tree.nodes) * env.n_actions > MAX_ENUMERATED_LEAVES:
            raise EnumerationLimitError(
                f"environment exceeds {MAX_ENUMERATED_LEAVES} enumerable leaves",
                {"nodes": len(tree.nodes)}
            )
        for edge in node.edges:
            if edge.child.depth < depth_limit and tree.is_expandable(edge.child, env):
                queue.append(edge.child)
    for state in reversed(order):
        backup_path(tree, state)
    return tree


def brute_force_ts_distribution(env, provider, n_samples: int, rng: np.random.Generator,
                                expand_depth: Optional[int] = None,
                                tree: Optional[SearchTree] = None) -> TsDistribution:
    """
    Monte-Carlo estimate of P(z* = z) over the frontier edges

    Each sample draws every frontier edge value independently from its
    posterior, solves the tree by backward induction and records the frontier
    edge on the optimal branch (ties go to the lowest action).
    """
    if n_samples < 1:
        raise InvalidArgumentError(f"n_samples must be positive, got {n_samples}")
    if tree is None:
        tree = build_enumerated_tree(env, provider, expand_depth)

    leaves = tree.frontier()
    if len(leaves) > MAX_ENUMERATED_LEAVES:
        raise EnumerationLimitError(f"{len(leaves)} leaves exceed the enumeration limit")
    leaf_index = {state.path + (action,): i for i, (state, action) in enumerate(leaves)}

    values: Dict[Tuple[int, ...], np.ndarray] = {}
    winners: Dict[Tuple[int, ...], np.ndarray] = {}
    for path in sorted(tree.nodes, key=len, reverse=True):
        node = tree.nodes[path]
        edge_values, edge_winners = [], []
        for edge in node.edges:
            child_path = edge.child.path
            if child_path in tree.nodes:
                edge_values.append(edge.reward + values[child_path])
                edge_winners.append(winners[child_path])
            else:
                if edge.terminal:
                    edge_values.append(np.full(n_samples, edge.reward))
                else:
                    edge_values.append(sample_many(edge.posterior, rng, n_samples, exact=True))
                edge_winners.append(np.full(n_samples, leaf_index[child_path]))
        stacked = np.stack(edge_values)
        best = np.argmax(stacked, axis=0)
        columns = np.arange(n_samples)
        values[path] = stacked[best, columns]
        winners[path] = np.stack(edge_winners)[best, columns]

    counts = np.bincount(winners[()], minlength=len(leaves))
    logger.debug(f"📊 Brute-force TS distribution over {len(leaves)} leaves from {n_samples} samples")
    return TsDistribution(leaves, counts / n_samples)


def prior_entropy(leaf_probs: Sequence[float]) -> float:
    """Shannon entropy in nats, with 0 log 0 = 0"""
    probs = np.asarray(leaf_probs, dtype=float)
    if probs.ndim != 1 or probs.size == 0:
        raise InvalidArgumentError("leaf probabilities must be a non-empty vector")
    if np.any(probs < 0) or abs(probs.sum() - 1.0) > 1e-9:
        raise InvalidArgumentError(f"leaf probabilities must be non-negative and sum to 1, got sum {probs.sum()}")
    return float(np.sum(entr(probs)))
