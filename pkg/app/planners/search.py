"""
Search loops and action commitment
"""
import logging
import math
import time
from typing import Callable, List, Optional

import numpy as np
from scipy.special import softmax

from app.core.posterior import quantile
from app.core.search_tree import (
    EdgeStat,
    SearchNode,
    SearchTree,
    StateRef,
    backup_path,
    branch_scores,
    descend,
    expand
)
from app.errors import InvalidArgumentError, InvalidConfigError
from app.planners.models import (
    Algorithm,
    CommitmentKind,
    CommitmentSpec,
    DngNodeStat,
    PlannerConfig,
    SearchOutcome
)
from app.planners.selection import (
    dng_backup,
    select_bayes_uct2,
    select_bayes_ucb,
    select_bts,
    select_dng,
    select_puct,
    select_tsts
)

# Configure logging
logger = logging.getLogger(__name__)

Selector = Callable[[SearchNode, np.random.Generator], int]


def make_selector(cfg: PlannerConfig) -> Selector:
    """In-tree selection rule for cfg.algorithm"""
    exact = cfg.exact_posterior_ops
    if cfg.algorithm == Algorithm.TSTS:
        return lambda node, rng: select_tsts(node, rng, exact)
    if cfg.algorithm == Algorithm.BTS:
        return lambda node, rng: select_bts(node, cfg.alpha0, cfg.effective_beta, exact)
    if cfg.algorithm == Algorithm.BAYES_UCB:
        return lambda node, rng: select_bayes_ucb(node, cfg.effective_beta, exact)
    if cfg.algorithm == Algorithm.BAYES_UCT2:
        return lambda node, rng: select_bayes_uct2(node)
    if cfg.algorithm in (Algorithm.PUCT, Algorithm.SH_PUCT):
        return lambda node, rng: select_puct(node, cfg.puct_c, cfg.softmax_temp)
    if cfg.algorithm == Algorithm.DNG:
        return select_dng
    raise InvalidConfigError(f"algorithm {cfg.algorithm} has no in-tree selection rule")


def _search_rng(cfg: PlannerConfig, rng: Optional[np.random.Generator]) -> np.random.Generator:
    if cfg.deterministic_mode or rng is None:
        return np.random.default_rng(cfg.seed)
    return rng


def _new_tree(env, oracle, cfg: PlannerConfig, root_state) -> SearchTree:
    root = env.root() if root_state is None else root_state
    if env.is_terminal(root):
        raise InvalidArgumentError("cannot search from a terminal state")
    tree = SearchTree(root, cfg.horizon or env.horizon(), cfg.bins_m)
    expand(tree, tree.root_ref, env, oracle)
    return tree


def _path_edges(tree: SearchTree, state: StateRef) -> List[EdgeStat]:
    edges = []
    for depth in range(len(state.path)):
        edges.append(tree.nodes[state.path[:depth]].edges[state.path[depth]])
    return edges


def _dng_update(tree: SearchTree, state: StateRef, tail_value: float, cfg: PlannerConfig) -> None:
    """Back the return of every edge on the path into its NormalGamma stat"""
    ret = tail_value
    for edge in reversed(_path_edges(tree, state)):
        ret += edge.reward
        stat = edge.dng or DngNodeStat(cfg.dng_mu0, cfg.dng_lambda, cfg.dng_alpha, cfg.dng_beta)
        edge.dng = dng_backup(stat, ret)


def _iterate(tree: SearchTree, env, oracle, cfg: PlannerConfig, select: Selector,
             rng: np.random.Generator, explored: list) -> None:
    """One descend / expand / backup iteration"""
    tree.iteration += 1
    state = descend(tree, select, env, rng)
    parent = tree.nodes[state.path[:-1]]
    edge = parent.edges[state.path[-1]]
    if tree.is_expandable(state, env):
        node = expand(tree, state, env, oracle)
        explored.append((parent.state, edge.action))
        backup_path(tree, state)
        tail_value = max(e.prior_mean for e in node.edges)
    else:
        # terminal or depth-capped child: nothing new to discover
        tail_value = 0.0 if edge.terminal else edge.prior_mean - edge.reward
    if cfg.algorithm == Algorithm.DNG:
        _dng_update(tree, state, tail_value, cfg)


def _outcome(tree: SearchTree, cfg: PlannerConfig, explored: list, started: float,
             recommended: Optional[int] = None) -> SearchOutcome:
    root = tree.root
    return SearchOutcome(
        root_state=root.state,
        root_posteriors=[edge.posterior for edge in root.edges],
        root_backed_values=[edge.value for edge in root.edges],
        explored_leaves=explored,
        tree_stats=tree.stats(),
        root_prior_means=[edge.prior_mean for edge in root.edges],
        recommended_action=recommended,
        wall_ms=(time.perf_counter() - started) * 1000.0,
        tree=tree,
        exact_posterior_ops=cfg.exact_posterior_ops
    )


def run_search(env, oracle, cfg: PlannerConfig, rng: Optional[np.random.Generator] = None,
               root_state=None) -> SearchOutcome:
    """
    Grow a search tree from root_state for cfg.budget_T iterations

    Args:
        env: DecisionProcess
        oracle: QueryProvider queried at every expansion
        cfg: Planner configuration
        rng: Generator for stochastic selectors (replaced by a fresh
            default_rng(cfg.seed) in deterministic mode)
        root_state: State to plan from (defaults to env.root())

    Returns:
        SearchOutcome with root posteriors, backed-up values and the explored leaves
    """
    if cfg.algorithm == Algorithm.SH_PUCT:
        return run_search_sh(env, oracle, cfg, rng, root_state)

    started = time.perf_counter()
    rng = _search_rng(cfg, rng)
    tree = _new_tree(env, oracle, cfg, root_state)
    explored: list = []

    if cfg.algorithm != Algorithm.GREEDY:
        select = make_selector(cfg)
        for _ in range(cfg.budget_T):
            _iterate(tree, env, oracle, cfg, select, rng, explored)

    logger.debug(f"🌳 {cfg.algorithm.value} search done: {tree.stats()}")
    return _outcome(tree, cfg, explored, started)


def _rank_arms(tree: SearchTree, arms: List[int]) -> List[int]:
    root = tree.root
    return sorted(arms, key=lambda a: (-root.edges[a].value, a))


def run_search_sh(env, oracle, cfg: PlannerConfig, rng: Optional[np.random.Generator] = None,
                  root_state=None) -> SearchOutcome:
    """
    Sequential halving over the root actions, P-UCT below the root

    ceil(log2 |A|) phases; each phase gets floor(T / phases) iterations split
    equally among the surviving arms, and whatever is left over goes to the
    final phase. After each phase the better half (rounded up) survives.
    """
    n_actions = env.n_actions
    if n_actions == 1:
        return run_search(env, oracle, cfg.model_copy(update={"algorithm": Algorithm.PUCT}), rng, root_state)
    if cfg.budget_T < n_actions:
        raise InvalidConfigError(
            f"sequential halving needs budget_T >= |A| ({cfg.budget_T} < {n_actions})",
            {"budget_T": cfg.budget_T, "n_actions": n_actions}
        )

    started = time.perf_counter()
    rng = _search_rng(cfg, rng)
    tree = _new_tree(env, oracle, cfg, root_state)
    explored: list = []
    below_root = make_selector(cfg)

    phases = math.ceil(math.log2(n_actions))
    per_phase = cfg.budget_T // phases
    survivors = list(range(n_actions))
    used = 0
    for phase in range(phases):
        budget = per_phase if phase < phases - 1 else cfg.budget_T - used
        share, extra = divmod(budget, len(survivors))
        if phase < phases - 1:
            extra = 0
        for rank, arm in enumerate(survivors):
            pulls = share + (1 if rank < extra else 0)

            def select(node, rng, arm=arm):
                return arm if node.state.depth == 0 else below_root(node, rng)

            for _ in range(pulls):
                _iterate(tree, env, oracle, cfg, select, rng, explored)
                used += 1
        ranked = _rank_arms(tree, survivors)
        survivors = ranked[:math.ceil(len(ranked) / 2)]
        logger.debug(f"🌳 Halving phase {phase + 1}/{phases}: survivors {survivors}")

    winner = _rank_arms(tree, survivors)[0]
    return _outcome(tree, cfg, explored, started, recommended=winner)


def commitment_scores(outcome: SearchOutcome, strategy: CommitmentSpec) -> List[float]:
    """Best discovered branch per root action under the strategy's leaf score"""
    if outcome.tree is None:
        return list(outcome.root_backed_values)
    if strategy.kind == CommitmentKind.QUANTILE:
        return branch_scores(
            outcome.tree,
            lambda edge: quantile(edge.posterior, strategy.alpha, outcome.exact_posterior_ops)
        )
    return branch_scores(outcome.tree, lambda edge: edge.posterior.moments[0])


def commit(outcome: SearchOutcome, strategy: CommitmentSpec,
           rng: Optional[np.random.Generator] = None) -> int:
    """
    Choose the action to execute after a search

    Args:
        outcome: Completed search
        strategy: mcts, quantile(alpha) or softmax(temperature)
        rng: Needed for softmax commitment only

    Returns:
        Root action index
    """
    if strategy.kind == CommitmentKind.MCTS and outcome.recommended_action is not None:
        return outcome.recommended_action

    scores = np.asarray(commitment_scores(outcome, strategy), dtype=float)
    if strategy.kind != CommitmentKind.SOFTMAX:
        return int(np.argmax(scores))

    if rng is None:
        raise InvalidArgumentError("softmax commitment needs a random generator")
    probs = softmax(scores / strategy.temperature)
    return int(rng.choice(len(probs), p=probs))
