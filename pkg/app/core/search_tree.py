"""
Discovered search tree with per-edge rewards, posteriors and visit counts

Nodes are identified by the action path from the search root, so states at
different depths (or reached along different paths) are always distinct.
"""
import json
import logging
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, List, Optional, Tuple

import numpy as np

from app.core.posterior import (
    DEFAULT_BINS,
    PosteriorDist,
    describe,
    max_of_independent,
    point_mass,
    shift
)
from app.errors import InvalidArgumentError, TreeLogicError

# Configure logging
logger = logging.getLogger(__name__)

Path = Tuple[int, ...]


@dataclass(frozen=True)
class StateRef:
    """Environment state handle tagged with its position in the search tree"""
    handle: Any = field(compare=False, hash=False)
    depth: int = 0
    path: Path = ()


@dataclass
class EdgeStat:
    """Statistics of one state-action pair"""
    action: int
    reward: float
    posterior: PosteriorDist
    child: StateRef
    prior_mean: float
    value: float
    terminal: bool = False
    visit_count: int = 0
    dng: Optional[Any] = None


@dataclass
class SearchNode:
    """An expanded state: one edge per action"""
    state: StateRef
    edges: List[EdgeStat]
    visit_count: int = 0
    parent: Optional[Tuple[StateRef, int]] = None


class SearchTree:
    """The known part of the search tree rooted at one state"""

    def __init__(self, root_state: Any, horizon: int, bins_m: int = DEFAULT_BINS):
        if horizon < 1:
            raise InvalidArgumentError(f"horizon must be positive, got {horizon}")
        self.root_ref = StateRef(root_state, 0, ())
        self.horizon = horizon
        self.bins_m = bins_m
        self.nodes: Dict[Path, SearchNode] = {}
        self.iteration = 0
        self.expansions = 0

    @property
    def root(self) -> SearchNode:
        if () not in self.nodes:
            raise TreeLogicError("search tree root has not been expanded")
        return self.nodes[()]

    def is_known(self, state: StateRef) -> bool:
        return state.path in self.nodes

    def node(self, state: StateRef) -> SearchNode:
        try:
            return self.nodes[state.path]
        except KeyError:
            raise TreeLogicError(f"state at path {state.path} is not in the known set")

    def is_expandable(self, state: StateRef, env) -> bool:
        """Unknown, non-terminal and above the depth cap"""
        return (
            state.path not in self.nodes
            and state.depth < self.horizon
            and not env.is_terminal(state.handle)
        )

    def frontier(self) -> List[Tuple[StateRef, int]]:
        """Leaf set Z_t: edges of known nodes whose child is not expanded"""
        leaves = []
        for node in self.nodes.values():
            for edge in node.edges:
                if edge.child.path not in self.nodes:
                    leaves.append((node.state, edge.action))
        return leaves

    def stats(self) -> Dict[str, int]:
        depth = max((len(path) for path in self.nodes), default=0)
        return {
            "nodes": len(self.nodes),
            "edges": sum(len(node.edges) for node in self.nodes.values()),
            "max_depth": depth,
            "expansions": self.expansions,
            "iterations": self.iteration
        }


def expand(tree: SearchTree, state: StateRef, env, oracle) -> SearchNode:
    """
    Add a state to the known set and initialise its edges

    Each edge gets the environment reward and the oracle's posterior of
    Q(s, a); edges into terminal states get a point mass at the reward.

    Args:
        tree: Search tree to grow
        state: Unknown, non-terminal state whose parent is known
        env: DecisionProcess
        oracle: QueryProvider

    Returns:
        The new SearchNode
    """
    if state.path in tree.nodes:
        raise TreeLogicError(f"state at path {state.path} is already expanded")
    if env.is_terminal(state.handle):
        raise TreeLogicError(f"terminal state at path {state.path} cannot be expanded")

    parent = None
    if state.depth > 0:
        parent_path = state.path[:-1]
        if parent_path not in tree.nodes:
            raise TreeLogicError(f"parent of path {state.path} is not in the known set")
        parent = (tree.nodes[parent_path].state, state.path[-1])

    posteriors = oracle.query(state.handle)
    edges = []
    for action in env.actions():
        next_state, reward = env.step(state.handle, action)
        terminal = env.is_terminal(next_state)
        posterior = point_mass(reward) if terminal else posteriors[action]
        prior_mean = posterior.moments[0]
        edges.append(EdgeStat(
            action=action,
            reward=reward,
            posterior=posterior,
            child=StateRef(next_state, state.depth + 1, state.path + (action,)),
            prior_mean=prior_mean,
            value=prior_mean,
            terminal=terminal
        ))

    node = SearchNode(state=state, edges=edges, parent=parent)
    tree.nodes[state.path] = node
    tree.expansions += 1
    logger.debug(f"🌳 Expanded path {state.path} ({len(edges)} edges)")
    return node


def backup_path(tree: SearchTree, leaf_state: StateRef) -> None:
    """
    Max-backup from an expanded state to the root

    Every ancestor edge (s, a) gets P(r(s, a) + max_a' Q(s', a')) built from the
    current posteriors of the child's edges; the scalar backed-up value follows
    the same recursion on posterior means.
    """
    current = tree.node(leaf_state)
    while current.state.depth > 0:
        parent_path = current.state.path[:-1]
        parent = tree.nodes.get(parent_path)
        if parent is None:
            raise TreeLogicError(f"path {current.state.path} is not connected to the root")
        edge = parent.edges[current.state.path[-1]]
        edge.posterior = shift(
            max_of_independent([e.posterior for e in current.edges], tree.bins_m),
            edge.reward
        )
        edge.value = edge.reward + max(e.value for e in current.edges)
        current = parent


def descend(
    tree: SearchTree,
    select: Callable[[SearchNode, np.random.Generator], int],
    env,
    rng: np.random.Generator
) -> StateRef:
    """
    Walk from the root with select until leaving the known set

    Visit counts are incremented before each selection. The returned state is
    unknown: either expandable, terminal, or at the depth cap.
    """
    state = tree.root.state
    while True:
        node = tree.nodes[state.path]
        node.visit_count += 1
        action = select(node, rng)
        edge = node.edges[action]
        edge.visit_count += 1
        child = edge.child
        if child.path not in tree.nodes:
            return child
        state = child


def branch_scores(tree: SearchTree, leaf_score: Callable[[EdgeStat], float]) -> List[float]:
    """
    Best discovered branch value per root action

    A branch is scored by its edge rewards plus leaf_score of its last edge;
    each root action reports its best branch.
    """
    def edge_score(edge: EdgeStat) -> float:
        child = tree.nodes.get(edge.child.path)
        if child is None:
            return leaf_score(edge)
        return edge.reward + max(edge_score(e) for e in child.edges)

    return [edge_score(edge) for edge in tree.root.edges]


def tree_to_dict(tree: SearchTree) -> Dict[str, Any]:
    """Nested dict of nodes, edges, rewards, posterior summaries and visit counts"""
    def node_dict(node: SearchNode) -> Dict[str, Any]:
        edges = []
        for edge in node.edges:
            child = tree.nodes.get(edge.child.path)
            edges.append({
                "action": edge.action,
                "reward": edge.reward,
                "posterior": describe(edge.posterior),
                "value": edge.value,
                "visits": edge.visit_count,
                "terminal": edge.terminal,
                "child": node_dict(child) if child is not None else None
            })
        return {"path": list(node.state.path), "visits": node.visit_count, "edges": edges}

    return {"horizon": tree.horizon, "stats": tree.stats(), "root": node_dict(tree.root)}


def dump_tree(tree: SearchTree, fmt: str = "json", action_names: Optional[List[str]] = None) -> str:
    """Serialize the tree as JSON or indented text"""
    if fmt == "json":
        return json.dumps(tree_to_dict(tree), indent=2)
    if fmt != "text":
        raise InvalidArgumentError(f"unknown tree dump format: {fmt}")

    lines = [f"root visits={tree.root.visit_count}"]

    def walk(node: SearchNode, indent: int):
        for edge in node.edges:
            name = action_names[edge.action] if action_names else str(edge.action)
            summary = describe(edge.posterior)
            lines.append(
                f"{'  ' * indent}{name}: r={edge.reward:g} mean={summary['mean']:.3f} "
                f"std={summary['std']:.3f} visits={edge.visit_count}{' terminal' if edge.terminal else ''}"
            )
            child = tree.nodes.get(edge.child.path)
            if child is not None:
                walk(child, indent + 1)

    walk(tree.root, 1)
    return "\n".join(lines)
