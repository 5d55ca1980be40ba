"""
Full |A|-ary trees with tabulated edge rewards, and the needle-tree family

A state is the action path from the root; an edge is identified by the path
of the state it leads to.
"""
import logging
from typing import Dict, List, Mapping, Optional, Sequence, Tuple

import numpy as np

from app.environments.base import DecisionProcess
from app.errors import InvalidArgumentError, InvalidParameterError

# Configure logging
logger = logging.getLogger(__name__)

Path = Tuple[int, ...]


def enumerate_edges(depth: int, branching: int) -> List[Path]:
    """All edges of the full tree, by depth then lexicographically"""
    edges: List[Path] = []
    level: List[Path] = [()]
    for _ in range(depth):
        level = [path + (a,) for path in level for a in range(branching)]
        edges.extend(level)
    return edges


class FullTree(DecisionProcess):
    """Full tree of the given depth and branching; unlisted edges pay 0"""

    def __init__(self, depth: int, branching: int, rewards: Optional[Mapping[Path, float]] = None):
        if depth < 1:
            raise InvalidParameterError(f"tree depth must be at least 1, got {depth}")
        if branching < 1:
            raise InvalidParameterError(f"branching must be at least 1, got {branching}")
        self.depth = depth
        self.branching = branching
        self.rewards: Dict[Path, float] = dict(rewards or {})
        for path in self.rewards:
            if not 1 <= len(path) <= depth or any(not 0 <= a < branching for a in path):
                raise InvalidParameterError(f"reward path {path} is not an edge of the tree")
        self._actions = tuple(range(branching))
        self._r_max = max((abs(r) for r in self.rewards.values()), default=0.0) or 1.0
        self._value_cache: Dict[Path, float] = {}

    def root(self) -> Path:
        return ()

    def actions(self) -> Sequence[int]:
        return self._actions

    def step(self, state: Path, action: int) -> Tuple[Path, float]:
        child = state + (action,)
        return child, self.rewards.get(child, 0.0)

    def is_terminal(self, state: Path) -> bool:
        return len(state) >= self.depth

    def horizon(self) -> int:
        return self.depth

    def r_max(self) -> float:
        return self._r_max

    def state_key(self, state: Path) -> Tuple[int, ...]:
        return (len(state),) + tuple(state)

    @property
    def n_edges(self) -> int:
        return sum(self.branching ** d for d in range(1, self.depth + 1))

    def optimal_value(self, state: Path) -> float:
        """Best achievable return from state"""
        return self._value(tuple(state))

    def gt_q(self, state: Path) -> np.ndarray:
        if self.is_terminal(state):
            raise InvalidArgumentError(f"state {state} is terminal")
        q = np.empty(self.branching)
        for action in self._actions:
            child, reward = self.step(state, action)
            q[action] = reward + self._value(child)
        return q

    def _value(self, state: Path) -> float:
        if state in self._value_cache:
            return self._value_cache[state]
        if self.is_terminal(state):
            value = 0.0
        else:
            value = max(self.step(state, a)[1] + self._value(state + (a,)) for a in self._actions)
        self._value_cache[state] = value
        return value


class NeedleTree(FullTree):
    """Full tree with exactly one edge paying reward 1"""

    def __init__(self, depth: int, branching: int, needle: Path):
        super().__init__(depth, branching, {tuple(needle): 1.0})
        self.needle: Path = tuple(needle)

    @property
    def needle_root_action(self) -> int:
        return self.needle[0]

    def gt_q(self, state: Path) -> np.ndarray:
        # Q is 1 exactly for the action whose subtree still holds the needle
        if self.is_terminal(state):
            raise InvalidArgumentError(f"state {state} is terminal")
        q = np.zeros(self.branching)
        n = len(state)
        if len(self.needle) > n and self.needle[:n] == tuple(state):
            q[self.needle[n]] = 1.0
        return q


def uniform_prior(n_edges: int) -> np.ndarray:
    """Uniform needle prior over all edges"""
    return np.full(n_edges, 1.0 / n_edges)


def concentrated_prior(n_edges: int, focus: int, mass: float) -> np.ndarray:
    """Prior placing mass on one edge and spreading the rest uniformly"""
    if not 0 <= focus < n_edges:
        raise InvalidParameterError(f"focus edge {focus} outside 0..{n_edges - 1}")
    if not 0.0 <= mass <= 1.0:
        raise InvalidParameterError(f"prior mass must lie in [0, 1], got {mass}")
    if n_edges == 1:
        return np.ones(1)
    prior = np.full(n_edges, (1.0 - mass) / (n_edges - 1))
    prior[focus] = mass
    return prior


def needle_tree(
    seed: int,
    depth: int,
    branching: int,
    prior: Optional[np.ndarray] = None
) -> Tuple[NeedleTree, np.ndarray]:
    """
    Sample a needle tree from a prior over its edges

    Args:
        seed: Seed for the needle draw
        depth: Tree depth H >= 1
        branching: Action count >= 2
        prior: Probabilities over enumerate_edges(depth, branching); uniform when omitted

    Returns:
        (NeedleTree, prior)
    """
    if depth < 1 or branching < 2:
        raise InvalidParameterError(f"needle trees need depth >= 1 and branching >= 2, got ({depth}, {branching})")
    edges = enumerate_edges(depth, branching)
    if prior is None:
        prior = uniform_prior(len(edges))
    prior = np.asarray(prior, dtype=float)
    if prior.shape != (len(edges),) or abs(prior.sum() - 1.0) > 1e-9 or np.any(prior < 0):
        raise InvalidParameterError("needle prior must be a probability vector over all edges")
    rng = np.random.default_rng(seed)
    index = int(rng.choice(len(edges), p=prior))
    return NeedleTree(depth, branching, edges[index]), prior
