"""
Root-action regret of a search, and leaf discovery on needle trees

Regret is measured through the root action of each explored leaf: an
iteration costs Q(s0, A*) - Q(s0, A_root(z_t)).
"""
import logging
from typing import Callable, List, Optional, Sequence, Tuple

import numpy as np

from app.core.search_tree import StateRef
from app.environments.tree import NeedleTree, enumerate_edges
from app.errors import InvalidArgumentError, InvalidParameterError
from app.planners.models import SearchOutcome

# Configure logging
logger = logging.getLogger(__name__)

DISCOVERY_RULES = ("thompson", "agnostic", "adversarial")


def root_action(state: StateRef, action: int) -> int:
    """Root action leading to the leaf edge (state, action)"""
    return state.path[0] if state.depth > 0 else action


def regret_trace(env, search_run, gt_solver: Optional[Callable] = None,
                 root_state=None) -> List[float]:
    """
    Instantaneous regret per explored leaf

    Args:
        env: DecisionProcess with a ground-truth gt_q
        search_run: SearchOutcome, or a sequence of (StateRef, action) leaves
        gt_solver: Optional replacement for env.gt_q
        root_state: Root handle when search_run is a plain sequence

    Returns:
        One regret value per explored leaf, in exploration order
    """
    if isinstance(search_run, SearchOutcome):
        leaves = search_run.explored_leaves
        root = search_run.root_state.handle
    else:
        leaves = list(search_run)
        root = env.root() if root_state is None else root_state
    solver = gt_solver or env.gt_q
    q = np.asarray(solver(root), dtype=float)
    best = float(q.max())
    return [best - float(q[root_action(state, action)]) for state, action in leaves]


class NeedleDiscovery:
    """
    Edge-by-edge discovery of a full tree with a prior over the needle edge

    The frontier holds unrevealed edges whose parent edge is revealed (or that
    leave the root). Each step reveals one frontier edge chosen by the rule:

    - thompson: sample the needle from the prior restricted to unrevealed
      edges and reveal the first unrevealed edge on its path; once found,
      explore uniformly below it (or re-select it when nothing is left)
    - agnostic: uniform over the frontier
    - adversarial: a frontier edge under a wrong root action whenever possible
    """

    def __init__(self, env: NeedleTree, prior: Sequence[float], rule: str = "thompson"):
        if rule not in DISCOVERY_RULES:
            raise InvalidArgumentError(f"unknown discovery rule {rule!r}, expected one of {DISCOVERY_RULES}")
        self.env = env
        self.rule = rule
        self.edges: List[Tuple[int, ...]] = enumerate_edges(env.depth, env.branching)
        self.prior = np.asarray(prior, dtype=float)
        if self.prior.shape != (len(self.edges),):
            raise InvalidParameterError(f"prior must have one entry per edge ({len(self.edges)})")
        self.index = {edge: i for i, edge in enumerate(self.edges)}
        self.revealed = np.zeros(len(self.edges), dtype=bool)
        self.found = False

    def frontier(self) -> List[int]:
        return [
            i for i, edge in enumerate(self.edges)
            if not self.revealed[i] and (len(edge) == 1 or self.revealed[self.index[edge[:-1]]])
        ]

    def _first_unrevealed_prefix(self, target: Tuple[int, ...]) -> int:
        for depth in range(1, len(target) + 1):
            i = self.index[target[:depth]]
            if not self.revealed[i]:
                return i
        return self.index[target]

    def _choose(self, rng: np.random.Generator) -> int:
        frontier = self.frontier()
        needle = self.env.needle
        if self.rule == "agnostic":
            if not frontier:
                return self.index[needle]
            return frontier[int(rng.integers(len(frontier)))]

        if self.rule == "adversarial":
            wrong = [i for i in frontier if self.edges[i][0] != needle[0]]
            if wrong:
                return wrong[0]
            return frontier[0] if frontier else self.index[needle]

        if self.found:
            below = [i for i in frontier if self.edges[i][:len(needle)] == needle]
            if not below:
                return self.index[needle]
            return below[int(rng.integers(len(below)))]
        weights = np.where(self.revealed, 0.0, self.prior)
        total = weights.sum()
        if total <= 0:
            # prior ruled out every unrevealed edge; fall back to the frontier
            return frontier[int(rng.integers(len(frontier)))]
        sampled = self.edges[int(rng.choice(len(self.edges), p=weights / total))]
        return self._first_unrevealed_prefix(sampled)

    def step(self, rng: np.random.Generator) -> Tuple[Tuple[int, ...], float]:
        """Reveal one edge; returns the edge and its root-action regret"""
        i = self._choose(rng)
        edge = self.edges[i]
        self.revealed[i] = True
        if edge == self.env.needle:
            self.found = True
        q = self.env.gt_q(())
        return edge, float(q.max() - q[edge[0]])

    def run(self, n_steps: int, rng: np.random.Generator) -> List[float]:
        """Per-step regret over n_steps discoveries"""
        return [self.step(rng)[1] for _ in range(n_steps)]
