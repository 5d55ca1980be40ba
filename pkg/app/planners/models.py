"""
Planner configuration and search result models
"""
import re
from dataclasses import dataclass, field
from enum import Enum
from typing import Any, Dict, List, Optional, Tuple

from pydantic import BaseModel, ConfigDict, Field, field_validator

from app.core.posterior import DEFAULT_BINS, PosteriorDist, describe
from app.core.search_tree import SearchTree, StateRef
from app.errors import InvalidParameterError


class Algorithm(str, Enum):
    """In-tree search strategies"""
    TSTS = "TSTS"
    BTS = "BTS"
    BAYES_UCB = "BayesUCB"
    BAYES_UCT2 = "BayesUCT2"
    PUCT = "PUCT"
    SH_PUCT = "SH_PUCT"
    DNG = "DNG"
    GREEDY = "GREEDY"


DEFAULT_BETA = {
    Algorithm.BTS: 3.0,
    Algorithm.BAYES_UCB: 0.5
}


class CommitmentKind(str, Enum):
    """How the executed action is chosen after a search"""
    MCTS = "mcts"
    QUANTILE = "quantile"
    SOFTMAX = "softmax"


_COMMITMENT_PATTERN = re.compile(r"^\s*(mcts|quantile|softmax)\s*(?:\(\s*([-+0-9.eE]+)\s*\))?\s*$")


class CommitmentSpec(BaseModel):
    """Commitment strategy with its parameter (alpha for quantile, temperature for softmax)"""
    model_config = ConfigDict(frozen=True)

    kind: CommitmentKind = CommitmentKind.MCTS
    alpha: float = Field(default=0.25, description="Quantile level for risk-averse commitment")
    temperature: float = Field(default=1.0, description="SoftMax temperature over backed-up values")

    @field_validator('alpha')
    @classmethod
    def validate_alpha(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError('commitment alpha must lie in (0, 1)')
        return v

    @field_validator('temperature')
    @classmethod
    def validate_temperature(cls, v):
        if v <= 0:
            raise ValueError('commitment temperature must be positive')
        return v

    @classmethod
    def parse(cls, text: str) -> "CommitmentSpec":
        """Parse 'mcts', 'quantile(0.25)' or 'softmax(2.0)'"""
        match = _COMMITMENT_PATTERN.match(text.lower())
        if match is None:
            raise ValueError(f"unrecognised commitment strategy: {text!r}")
        kind, param = CommitmentKind(match.group(1)), match.group(2)
        if param is None:
            return cls(kind=kind)
        if kind == CommitmentKind.QUANTILE:
            return cls(kind=kind, alpha=float(param))
        if kind == CommitmentKind.SOFTMAX:
            return cls(kind=kind, temperature=float(param))
        raise ValueError("mcts commitment takes no parameter")

    def __str__(self) -> str:
        if self.kind == CommitmentKind.QUANTILE:
            return f"quantile({self.alpha:g})"
        if self.kind == CommitmentKind.SOFTMAX:
            return f"softmax({self.temperature:g})"
        return "mcts"


class PlannerConfig(BaseModel):
    """Algorithm selection and hyperparameters of one planner"""
    model_config = ConfigDict(frozen=True)

    algorithm: Algorithm = Field(default=Algorithm.BTS, description="Search strategy")
    budget_T: int = Field(default=50, description="Tree-search iterations per decision")
    alpha0: float = Field(default=0.5, description="BTS initial quantile level")
    beta: Optional[float] = Field(default=None, description="BTS schedule rate or Bayes-UCB beta")
    puct_c: float = Field(default=1.0, description="P-UCT exploration constant")
    softmax_temp: float = Field(default=2.0, description="Temperature of the P-UCT prior policy")
    commitment: CommitmentSpec = Field(default_factory=CommitmentSpec, description="Action commitment")
    seed: int = Field(default=0, description="Planner seed")
    deterministic_mode: bool = Field(default=False, description="Re-seed identically at every call")
    bins_m: int = Field(default=DEFAULT_BINS, description="Max-backup bins")
    exact_posterior_ops: bool = Field(default=False, description="Exact-CDF quantiles and sampling")
    horizon: Optional[int] = Field(default=None, description="Depth cap override")
    dng_mu0: float = Field(default=0.0, description="DNG prior mean")
    dng_lambda: float = Field(default=0.001, description="DNG prior precision scale")
    dng_alpha: float = Field(default=1.0, description="DNG Gamma shape")
    dng_beta: float = Field(default=100.0, description="DNG Gamma rate")

    @field_validator('algorithm', mode='before')
    @classmethod
    def parse_algorithm(cls, v):
        if isinstance(v, str):
            for member in Algorithm:
                if v.strip().lower() in (member.value.lower(), member.name.lower()):
                    return member
        return v

    @field_validator('commitment', mode='before')
    @classmethod
    def parse_commitment(cls, v):
        if isinstance(v, str):
            return CommitmentSpec.parse(v)
        return v

    @field_validator('budget_T')
    @classmethod
    def validate_budget(cls, v):
        if v < 1:
            raise ValueError('budget_T must be at least 1')
        return v

    @field_validator('alpha0')
    @classmethod
    def validate_alpha0(cls, v):
        if not 0.0 < v < 1.0:
            raise ValueError('alpha0 must lie in (0, 1)')
        return v

    @field_validator('beta', 'softmax_temp', 'dng_lambda', 'dng_alpha', 'dng_beta')
    @classmethod
    def validate_positive(cls, v):
        if v is not None and v <= 0:
            raise ValueError('rates, temperatures and NormalGamma parameters must be positive')
        return v

    @field_validator('puct_c')
    @classmethod
    def validate_puct_c(cls, v):
        if v < 0:
            raise ValueError('puct_c must be non-negative')
        return v

    @field_validator('bins_m')
    @classmethod
    def validate_bins(cls, v):
        if v < 2:
            raise ValueError('bins_m must be at least 2')
        return v

    @field_validator('horizon')
    @classmethod
    def validate_horizon(cls, v):
        if v is not None and v < 1:
            raise ValueError('horizon must be positive')
        return v

    @property
    def effective_beta(self) -> float:
        """beta, or the algorithm's tuned default when unset"""
        if self.beta is not None:
            return self.beta
        return DEFAULT_BETA.get(self.algorithm, 3.0)

    @property
    def label(self) -> str:
        return f"{self.algorithm.value}/{self.commitment}"


@dataclass(frozen=True)
class DngNodeStat:
    """NormalGamma parameters <mu0, lambda, alpha, beta> of a node value"""
    mu0: float
    lam: float
    alpha: float
    beta: float

    def __post_init__(self):
        if self.lam <= 0 or self.alpha <= 0 or self.beta <= 0:
            raise InvalidParameterError(
                f"NormalGamma parameters must be positive, got lambda={self.lam}, alpha={self.alpha}, beta={self.beta}"
            )


@dataclass
class SearchOutcome:
    """Result of one search from a root state"""
    root_state: StateRef
    root_posteriors: List[PosteriorDist]
    root_backed_values: List[float]
    explored_leaves: List[Tuple[StateRef, int]]
    tree_stats: Dict[str, int]
    root_prior_means: List[float] = field(default_factory=list)
    recommended_action: Optional[int] = None
    regret_trace: Optional[List[float]] = None
    wall_ms: float = 0.0
    tree: Optional[SearchTree] = field(default=None, repr=False)
    exact_posterior_ops: bool = False

    def summary(self) -> Dict[str, Any]:
        """Compact, picklable record kept per episode step"""
        return {
            "root_means": [describe(d)["mean"] for d in self.root_posteriors],
            "root_stds": [describe(d)["std"] for d in self.root_posteriors],
            "root_backed_values": list(self.root_backed_values),
            "explored": len(self.explored_leaves),
            "recommended_action": self.recommended_action,
            "mean_regret": (sum(self.regret_trace) / len(self.regret_trace)) if self.regret_trace else 0.0,
            **self.tree_stats
        }
