"""
Directional checks over experiment results

Every check compares maze success rates at one budget across planners that
ran on the same environment seeds. Planners are looked up by their experiment
label, so result files from several specs can be combined as long as the
labels do not collide.
"""
import logging
from dataclasses import dataclass
from typing import Any, Dict, List, Optional, Sequence

import pandas as pd
from pydantic import BaseModel, Field

from app.errors import InvalidArgumentError
from app.utils.results_store import ResultsStore

# Configure logging
logger = logging.getLogger(__name__)

KEY_COLUMNS = ['planner', 'budget', 'env_seed', 'rep']


class PlannerLabels(BaseModel):
    """Experiment labels of the planners the checks compare"""
    greedy: str = Field(default="greedy", description="Root-only reference planner")
    bts: str = Field(default="bts", description="BTS with ground-truth sigma")
    tsts: str = Field(default="tsts", description="TSTS with ground-truth sigma")
    bayes_uct2: str = Field(default="bayes-uct2", description="Bayes-UCT2 with ground-truth sigma")
    puct_fixed: str = Field(default="puct-fixed", description="P-UCT under the fixed-sigma oracle")
    bts_noised: str = Field(default="bts-noised", description="BTS with perturbed sigma")
    bts_mcts: str = Field(default="bts-mcts", description="BTS with visit-count commitment")
    bts_quantile: str = Field(default="bts-quantile", description="BTS with quantile(0.25) commitment")


@dataclass
class CheckResult:
    """Outcome of one check; passed is None when a planner is missing from the results"""
    name: str
    passed: Optional[bool]
    detail: str

    @property
    def status(self) -> str:
        if self.passed is None:
            return "SKIP"
        return "PASS" if self.passed else "FAIL"

    def to_dict(self) -> Dict[str, Any]:
        return {"name": self.name, "status": self.status, "detail": self.detail}


def load_results(paths: Sequence[str]) -> pd.DataFrame:
    """Concatenate result CSVs; the same (planner, budget, env_seed, rep) may not appear twice"""
    if not paths:
        raise InvalidArgumentError("at least one results file is needed")
    frames = []
    for path in paths:
        store = ResultsStore(path)
        if not store.csv_path.exists():
            raise InvalidArgumentError(f"results file {path} does not exist")
        frames.append(store.load())
    df = pd.concat(frames, ignore_index=True)
    duplicated = df[df.duplicated(subset=KEY_COLUMNS, keep=False)]
    if not duplicated.empty:
        raise InvalidArgumentError(
            "planner labels collide across results files",
            {"planners": sorted(set(duplicated['planner'].astype(str)))}
        )
    return df


def success_rates(df: pd.DataFrame, budget: int) -> Dict[str, float]:
    """Mean solved flag per planner at one budget"""
    cell = df[df['budget'] == budget]
    if cell.empty:
        raise InvalidArgumentError(f"no results at budget {budget}")
    rates = cell.groupby('planner')['solved'].apply(lambda s: float(s.astype(int).mean()))
    return {str(planner): float(rate) for planner, rate in rates.items()}


def _missing(name: str, rates: Dict[str, float], *labels: str) -> Optional[CheckResult]:
    absent = [label for label in labels if label not in rates]
    if absent:
        return CheckResult(name, None, f"no results for {', '.join(absent)}")
    return None


def check_uncertainty_advantage(rates: Dict[str, float], labels: PlannerLabels,
                                greedy_ceiling: float = 0.6, margin: float = 0.10) -> CheckResult:
    """Greedy solves fewer than greedy_ceiling and BTS beats fixed-sigma P-UCT by margin"""
    name = "uncertainty-advantage"
    skipped = _missing(name, rates, labels.greedy, labels.bts, labels.puct_fixed)
    if skipped:
        return skipped
    greedy, bts, puct = rates[labels.greedy], rates[labels.bts], rates[labels.puct_fixed]
    passed = greedy < greedy_ceiling and bts - puct >= margin - 1e-12
    detail = f"greedy {greedy:.1%} (< {greedy_ceiling:.0%}), bts {bts:.1%} vs puct-fixed {puct:.1%}"
    return CheckResult(name, passed, detail)


def check_bayesian_ordering(rates: Dict[str, float], labels: PlannerLabels,
                            tolerance: float = 0.03) -> CheckResult:
    """BTS at least matches Bayes-UCT2 and TSTS, within tolerance"""
    name = "bayesian-ordering"
    skipped = _missing(name, rates, labels.bts, labels.bayes_uct2, labels.tsts)
    if skipped:
        return skipped
    bts = rates[labels.bts]
    others = {labels.bayes_uct2: rates[labels.bayes_uct2], labels.tsts: rates[labels.tsts]}
    passed = all(bts >= rate - tolerance - 1e-12 for rate in others.values())
    detail = f"bts {bts:.1%} vs " + ", ".join(f"{k} {v:.1%}" for k, v in others.items())
    return CheckResult(name, passed, detail)


def check_noise_robustness(rates: Dict[str, float], labels: PlannerLabels) -> CheckResult:
    """BTS with perturbed sigma still beats fixed-sigma P-UCT"""
    name = "noise-robustness"
    skipped = _missing(name, rates, labels.bts_noised, labels.puct_fixed)
    if skipped:
        return skipped
    noised, puct = rates[labels.bts_noised], rates[labels.puct_fixed]
    return CheckResult(name, noised > puct, f"bts-noised {noised:.1%} vs puct-fixed {puct:.1%}")


def check_commitment(rates: Dict[str, float], labels: PlannerLabels) -> CheckResult:
    """Quantile commitment solves at least as many mazes as visit-count commitment"""
    name = "risk-averse-commitment"
    skipped = _missing(name, rates, labels.bts_quantile, labels.bts_mcts)
    if skipped:
        return skipped
    quantile, mcts = rates[labels.bts_quantile], rates[labels.bts_mcts]
    return CheckResult(name, quantile >= mcts, f"quantile {quantile:.1%} vs mcts {mcts:.1%}")


def run_checks(df: pd.DataFrame, budget: int = 50, labels: Optional[PlannerLabels] = None) -> List[CheckResult]:
    """
    Evaluate every check on the rows at one budget

    Args:
        df: Result rows, e.g. from load_results
        budget: Search budget the comparison is read at
        labels: Planner labels (defaults match the shipped experiment specs)

    Returns:
        One CheckResult per check, SKIP where a planner has no rows
    """
    labels = labels or PlannerLabels()
    rates = success_rates(df, budget)
    results = [
        check_uncertainty_advantage(rates, labels),
        check_bayesian_ordering(rates, labels),
        check_noise_robustness(rates, labels),
        check_commitment(rates, labels),
    ]
    for result in results:
        icon = {"PASS": "✅", "FAIL": "❌", "SKIP": "⚠️"}[result.status]
        logger.info(f"{icon} {result.name}: {result.status} ({result.detail})")
    return results
