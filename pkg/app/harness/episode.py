"""
Online planning: search, commit, act, repeat
"""
import logging

import numpy as np

from app.errors import InvalidArgumentError
from app.harness.models import EpisodeResult
from app.harness.regret import regret_trace
from app.planners.models import PlannerConfig
from app.planners.search import commit, run_search
from app.utils.monitoring import monitor_operation
from app.utils.seeding import derive_rng

# Configure logging
logger = logging.getLogger(__name__)

SEARCH_STREAM = 0
COMMIT_STREAM = 1


def _regret_or_empty(env, outcome) -> list:
    try:
        return regret_trace(env, outcome)
    except NotImplementedError:
        return []


def _commit_rng(cfg: PlannerConfig, seed: int, step: int) -> np.random.Generator:
    if cfg.deterministic_mode:
        return derive_rng(cfg.seed, COMMIT_STREAM)
    return derive_rng(seed, COMMIT_STREAM, step)


@monitor_operation("episode")
def online_episode(env, cfg: PlannerConfig, oracle, k: int, seed: int,
                   start_state=None) -> EpisodeResult:
    """
    Run up to k planning steps from the environment root

    Each step searches from the current state with budget cfg.budget_T,
    commits to an action with cfg.commitment and advances the environment.
    The episode stops early only on reaching a terminal state. In
    deterministic mode the commitment stream is the same at every step, so
    softmax commitment repeats its draw for identical root posteriors.

    Args:
        env: DecisionProcess (its root is the episode start unless start_state is given)
        cfg: Planner configuration
        oracle: QueryProvider used by every search
        k: Step cap
        seed: Episode seed; search and commitment streams are derived per step

    Returns:
        EpisodeResult
    """
    if k < 1:
        raise InvalidArgumentError(f"step cap must be positive, got {k}")

    state = env.root() if start_state is None else start_state
    actions, stats, regrets = [], [], []
    total_reward = 0.0
    solved = env.is_terminal(state)

    for step in range(k):
        if solved:
            break
        search_rng = derive_rng(seed, SEARCH_STREAM, step)
        outcome = run_search(env, oracle, cfg, search_rng, root_state=state)
        action = commit(outcome, cfg.commitment, _commit_rng(cfg, seed, step))

        outcome.regret_trace = _regret_or_empty(env, outcome)
        summary = outcome.summary()
        summary["committed_action"] = action
        regret = summary["mean_regret"]
        stats.append(summary)
        regrets.append(regret)
        actions.append(action)

        state, reward = env.step(state, action)
        total_reward += reward
        solved = env.is_terminal(state)

    result = EpisodeResult(
        solved=solved,
        steps_taken=len(actions),
        committed_actions=actions,
        per_step_search_stats=stats,
        seed=seed,
        total_reward=total_reward,
        mean_regret=float(np.mean(regrets)) if regrets else 0.0,
        final_state=state,
        step_regrets=regrets
    )
    status = "✅ solved" if solved else "⚠️ unsolved"
    logger.info(f"🧭 Episode seed={seed} {cfg.label}: {status} in {result.steps_taken} steps")
    return result
