"""
In-tree selection rules

Every selector takes an expanded SearchNode (whose visit count has already
been incremented for the current visit) and returns an action index. Ties
are broken towards the lowest index.
"""
import logging
import math
from typing import Tuple

import numpy as np
from scipy.special import erf, softmax
from scipy.stats import norm

from app.core.posterior import DiscreteCdfPosterior, quantile, sample
from app.core.search_tree import SearchNode
from app.errors import InvalidArgumentError
from app.planners.models import DngNodeStat

# Configure logging
logger = logging.getLogger(__name__)

UCB_LEVEL_FLOOR = 0.001
LEVEL_CEILING = 1.0 - 1e-12


def _moments(node: SearchNode) -> Tuple[np.ndarray, np.ndarray]:
    means = np.array([edge.posterior.moments[0] for edge in node.edges])
    variances = np.array([edge.posterior.moments[1] for edge in node.edges])
    return means, np.maximum(variances, 0.0)


def _quantile_scores(node: SearchNode, level: float, exact: bool) -> np.ndarray:
    level = min(max(level, UCB_LEVEL_FLOOR), LEVEL_CEILING)
    if exact and any(isinstance(edge.posterior, DiscreteCdfPosterior) for edge in node.edges):
        return np.array([quantile(edge.posterior, level, exact=True) for edge in node.edges])
    means, variances = _moments(node)
    return means + np.sqrt(variances) * norm.ppf(level)


def select_tsts(node: SearchNode, rng: np.random.Generator, exact: bool = False) -> int:
    """One posterior draw per edge, then argmax"""
    draws = [sample(edge.posterior, rng, exact) for edge in node.edges]
    return int(np.argmax(draws))


def bts_quantile_level(n_visits: int, alpha0: float, beta: float) -> float:
    """alpha(s) = 1 - (1 - alpha0) * exp(-(N(s) - 1) / beta)"""
    if n_visits < 1:
        raise InvalidArgumentError(f"visit count must be at least 1, got {n_visits}")
    return 1.0 - (1.0 - alpha0) * math.exp(-(n_visits - 1) / beta)


def select_bts(node: SearchNode, alpha0: float, beta: float, exact: bool = False) -> int:
    """Argmax of per-edge quantiles at the visit-dependent BTS level"""
    level = bts_quantile_level(max(node.visit_count, 1), alpha0, beta)
    return int(np.argmax(_quantile_scores(node, level, exact)))


def bayes_ucb_level(n_visits: int, beta: float) -> float:
    """max(eps, 1 - beta / N(s))"""
    if n_visits < 1:
        raise InvalidArgumentError(f"visit count must be at least 1, got {n_visits}")
    return max(UCB_LEVEL_FLOOR, 1.0 - beta / n_visits)


def select_bayes_ucb(node: SearchNode, beta: float, exact: bool = False) -> int:
    level = bayes_ucb_level(max(node.visit_count, 1), beta)
    return int(np.argmax(_quantile_scores(node, level, exact)))


def bayes_uct2_scores(node: SearchNode) -> np.ndarray:
    """Posterior mean plus sqrt(2 ln N(s) * variance)"""
    n_visits = max(node.visit_count, 1)
    means, variances = _moments(node)
    return means + np.sqrt(2.0 * math.log(n_visits) * variances)


def select_bayes_uct2(node: SearchNode) -> int:
    return int(np.argmax(bayes_uct2_scores(node)))


def bayes_uct2_level(n_visits: int) -> float:
    """
    Quantile level at which a Gaussian quantile equals the UCT2 score

    Only a cross-check: selection uses the additive form.
    """
    if n_visits < 1:
        raise InvalidArgumentError(f"visit count must be at least 1, got {n_visits}")
    return 0.5 + 0.5 * float(erf(math.sqrt(math.log(n_visits))))


def puct_prior(node: SearchNode, temp: float) -> np.ndarray:
    """SoftMax over the oracle means with temperature temp"""
    if temp <= 0:
        raise InvalidArgumentError(f"softmax temperature must be positive, got {temp}")
    prior_means = np.array([edge.prior_mean for edge in node.edges])
    return softmax(prior_means / temp)


def select_puct(node: SearchNode, c: float, temp: float) -> int:
    """Q + c * pi(a|s) * sqrt(N(s)) / (1 + N(s, a)) over scalar backed-up values"""
    q_values = np.array([edge.value for edge in node.edges])
    visits = np.array([edge.visit_count for edge in node.edges], dtype=float)
    bonus = c * puct_prior(node, temp) * math.sqrt(node.visit_count) / (1.0 + visits)
    return int(np.argmax(q_values + bonus))


def dng_backup(stat: DngNodeStat, r: float) -> DngNodeStat:
    """NormalGamma update with one return r; beta and mu0 use the pre-update lambda and mu0"""
    residual = r - stat.mu0
    return DngNodeStat(
        mu0=(stat.lam * stat.mu0 + r) / (stat.lam + 1.0),
        lam=stat.lam + 1.0,
        alpha=stat.alpha + 0.5,
        beta=stat.beta + (stat.lam * residual * residual / (stat.lam + 1.0)) / 2.0
    )


def sample_dng_value(stat: DngNodeStat, rng: np.random.Generator) -> float:
    """tau ~ Gamma(alpha, rate beta), mu ~ N(mu0, 1 / (lambda * tau))"""
    tau = rng.gamma(stat.alpha, 1.0 / stat.beta)
    tau = max(tau, np.finfo(float).tiny)
    return float(rng.normal(stat.mu0, 1.0 / math.sqrt(stat.lam * tau)))


def select_dng(node: SearchNode, rng: np.random.Generator) -> int:
    """Thompson sampling on NormalGamma edge stats; unvisited edges use the oracle mean"""
    scores = [
        edge.prior_mean if edge.dng is None else sample_dng_value(edge.dng, rng)
        for edge in node.edges
    ]
    return int(np.argmax(scores))
