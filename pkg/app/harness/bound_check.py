"""
Empirical check of the Thompson-sampling regret bound on needle trees
"""
import logging
import math
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Sequence

import numpy as np

from app.environments.tree import enumerate_edges, needle_tree, uniform_prior
from app.errors import InvalidArgumentError
from app.harness.regret import NeedleDiscovery
from app.oracles.reference import prior_entropy
from app.utils.monitoring import monitor_operation
from app.utils.seeding import derive_seed

# Configure logging
logger = logging.getLogger(__name__)

BOUND_TOLERANCE = 1e-12


@dataclass
class BoundReport:
    """Empirical mean cumulative regret against the bound at each budget"""
    depth: int
    branching: int
    n_leaves: int
    entropy: float
    r_max: float
    repetitions: int
    rule: str
    budgets: List[int]
    empirical: List[float]
    stderr: List[float]
    bound: List[float]
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = all(e <= b + BOUND_TOLERANCE for e, b in zip(self.empirical, self.bound))

    @property
    def verdict(self) -> str:
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> Dict:
        return {
            "depth": self.depth,
            "branching": self.branching,
            "n_leaves": self.n_leaves,
            "entropy": self.entropy,
            "r_max": self.r_max,
            "repetitions": self.repetitions,
            "rule": self.rule,
            "rows": [
                {"T": t, "empirical": e, "stderr": s, "bound": b}
                for t, e, s, b in zip(self.budgets, self.empirical, self.stderr, self.bound)
            ],
            "verdict": self.verdict
        }

    def to_text(self) -> str:
        lines = [
            f"needle trees depth={self.depth} branching={self.branching} |Z|={self.n_leaves} "
            f"H(z*)={self.entropy:.4f} rule={self.rule} reps={self.repetitions}",
            f"{'T':>5} {'E[Regret]':>12} {'stderr':>10} {'bound':>12}"
        ]
        for t, e, s, b in zip(self.budgets, self.empirical, self.stderr, self.bound):
            lines.append(f"{t:>5} {e:>12.4f} {s:>10.4f} {b:>12.4f}")
        lines.append(self.verdict)
        return "\n".join(lines)


def regret_bound(horizon: int, r_max: float, n_leaves: int, entropy: float, budget: int) -> float:
    """H * R_max * sqrt(0.5 * |Z| * H(z*) * T)"""
    return horizon * r_max * math.sqrt(0.5 * n_leaves * max(entropy, 0.0) * budget)


@monitor_operation("bound_check")
def bound_check(depth: int, branching: int, budgets: Sequence[int], repetitions: int,
                seed: int, prior: Optional[Sequence[float]] = None,
                rule: str = "thompson") -> BoundReport:
    """
    Sample needle trees from the prior, run leaf discovery and compare regret to the bound

    Args:
        depth: Tree depth H
        branching: Actions per node
        budgets: Budgets T at which cumulative regret is reported
        repetitions: Sampled trees
        seed: Seed for tree draws and discovery
        prior: Needle prior over enumerate_edges(depth, branching); uniform when omitted
        rule: thompson, agnostic or adversarial

    Returns:
        BoundReport; passed iff the empirical mean is within the bound at every T
    """
    budgets = sorted(set(int(t) for t in budgets))
    if not budgets or budgets[0] < 1:
        raise InvalidArgumentError("budgets must be positive integers")
    if repetitions < 1:
        raise InvalidArgumentError(f"repetitions must be positive, got {repetitions}")

    n_leaves = len(enumerate_edges(depth, branching))
    prior = uniform_prior(n_leaves) if prior is None else np.asarray(prior, dtype=float)
    entropy = prior_entropy(prior)
    horizon_t = budgets[-1]

    logger.info(f"🔍 Bound check: {repetitions} needle trees, |Z|={n_leaves}, H(z*)={entropy:.4f}, rule={rule}")
    cumulative = np.zeros((repetitions, horizon_t))
    for rep in range(repetitions):
        env, _ = needle_tree(derive_seed(seed, 0, rep), depth, branching, prior)
        rng = np.random.default_rng(derive_seed(seed, 1, rep))
        trace = NeedleDiscovery(env, prior, rule).run(horizon_t, rng)
        cumulative[rep] = np.cumsum(trace)

    columns = [t - 1 for t in budgets]
    empirical = cumulative[:, columns].mean(axis=0)
    stderr = (cumulative[:, columns].std(axis=0, ddof=1) / math.sqrt(repetitions)
              if repetitions > 1 else np.zeros(len(columns)))
    r_max = 1.0
    report = BoundReport(
        depth=depth,
        branching=branching,
        n_leaves=n_leaves,
        entropy=entropy,
        r_max=r_max,
        repetitions=repetitions,
        rule=rule,
        budgets=budgets,
        empirical=[float(v) for v in empirical],
        stderr=[float(v) for v in stderr],
        bound=[regret_bound(depth, r_max, n_leaves, entropy, t) for t in budgets]
    )
    logger.info(f"{'✅' if report.passed else '❌'} Bound check {report.verdict}")
    return report
