"""
Value-posterior providers queried when the search expands a state

A CorruptedPredictor stands in for a learned value network: its mean is the
exact Q value plus a seeded, state-action-deterministic error. Providers turn
those means into per-action Gaussian posteriors with different notions of
uncertainty.
"""
import logging
from abc import ABC, abstractmethod
from typing import Dict, Hashable, List, Literal, Mapping, Optional, Sequence

import numpy as np
from pydantic import BaseModel, Field, field_validator

from app.core.posterior import PosteriorDist, make_gaussian
from app.environments.base import DecisionProcess
from app.errors import InvalidParameterError

# Configure logging
logger = logging.getLogger(__name__)

PREDICTOR_STREAM = 0
SIGMA_STREAM = 1
DEFAULT_ERROR_FLOOR = 0.1


def _state_rng(seed: int, stream: int, key: Sequence[int]) -> np.random.Generator:
    return np.random.default_rng([int(seed), stream, *key])


class QueryProvider(ABC):
    """Per-action posteriors P(Q(s, a)) for a state"""

    @abstractmethod
    def query(self, state: Hashable) -> List[PosteriorDist]:
        """Posterior for every action at state"""


class CorruptedPredictor:
    """Exact Q values plus Gaussian error of scale error_scale * (|Q| + floor)"""

    def __init__(self, env: DecisionProcess, error_scale: float, seed: int,
                 error_floor: float = DEFAULT_ERROR_FLOOR):
        if error_scale < 0:
            raise InvalidParameterError(f"error_scale must be non-negative, got {error_scale}")
        if error_floor < 0:
            raise InvalidParameterError(f"error_floor must be non-negative, got {error_floor}")
        self.env = env
        self.error_scale = float(error_scale)
        self.error_floor = float(error_floor)
        self.seed = int(seed)
        self._cache: Dict[Hashable, np.ndarray] = {}

    def ground_truth(self, state: Hashable) -> np.ndarray:
        return self.env.gt_q(state)

    def predict(self, state: Hashable) -> np.ndarray:
        """Predicted mean mu(s, a) per action"""
        if state not in self._cache:
            q = self.ground_truth(state)
            rng = _state_rng(self.seed, PREDICTOR_STREAM, self.env.state_key(state))
            scale = self.error_scale * (np.abs(q) + self.error_floor)
            self._cache[state] = q + rng.normal(0.0, 1.0, q.shape) * scale
        return self._cache[state]


class GroundTruthSigmaProvider(QueryProvider):
    """Gaussian(mu, |mu - Q_GT|): the predictor's own error as its std"""

    def __init__(self, predictor: CorruptedPredictor):
        self.predictor = predictor

    def query(self, state: Hashable) -> List[PosteriorDist]:
        return gt_sigma_query(self.predictor, state)


class FixedSigmaProvider(QueryProvider):
    """Gaussian(mu, sigma0) for every pair: no uncertainty information"""

    def __init__(self, predictor: CorruptedPredictor, sigma0: float):
        if sigma0 < 0:
            raise InvalidParameterError(f"sigma0 must be non-negative, got {sigma0}")
        self.predictor = predictor
        self.sigma0 = float(sigma0)

    def query(self, state: Hashable) -> List[PosteriorDist]:
        return [make_gaussian(mu, self.sigma0) for mu in self.predictor.predict(state)]


class PerturbedSigmaProvider(QueryProvider):
    """Scales every std of a base provider by 1 + U, U ~ Uniform(-rho/100, rho/100)"""

    def __init__(self, base: QueryProvider, env: DecisionProcess, rho_percent: float, seed: int):
        if not 0.0 <= rho_percent <= 100.0:
            raise InvalidParameterError(f"rho_percent must lie in [0, 100], got {rho_percent}")
        self.base = base
        self.env = env
        self.rho_percent = float(rho_percent)
        self.seed = int(seed)

    def factors(self, state: Hashable, n_actions: int) -> np.ndarray:
        if self.rho_percent == 0.0:
            return np.ones(n_actions)
        width = 0.01 * self.rho_percent
        rng = _state_rng(self.seed, SIGMA_STREAM, self.env.state_key(state))
        return 1.0 + rng.uniform(-width, width, n_actions)

    def query(self, state: Hashable) -> List[PosteriorDist]:
        dists = self.base.query(state)
        factors = self.factors(state, len(dists))
        return [make_gaussian(d.moments[0], np.sqrt(d.moments[1]) * f) for d, f in zip(dists, factors)]


class TablePosteriorProvider(QueryProvider):
    """Static posteriors looked up by state, for synthetic trees"""

    def __init__(self, table: Mapping[Hashable, Sequence[PosteriorDist]],
                 default: Optional[Sequence[PosteriorDist]] = None):
        self.table = {state: list(dists) for state, dists in table.items()}
        self.default = list(default) if default is not None else None

    def query(self, state: Hashable) -> List[PosteriorDist]:
        if state in self.table:
            return self.table[state]
        if self.default is None:
            raise KeyError(f"no posterior table entry for state {state!r}")
        return self.default


def gt_sigma_query(predictor: CorruptedPredictor, state: Hashable) -> List[PosteriorDist]:
    """Per-action Gaussian(mu, |mu - Q_GT|)"""
    mu = predictor.predict(state)
    q = predictor.ground_truth(state)
    return [make_gaussian(m, abs(m - g)) for m, g in zip(mu, q)]


def fixed_sigma_query(predictor: CorruptedPredictor, sigma0: float) -> QueryProvider:
    """Provider with a constant std for all pairs"""
    return FixedSigmaProvider(predictor, sigma0)


def perturb_sigma(provider: QueryProvider, env: DecisionProcess, rho_percent: float, seed: int) -> QueryProvider:
    """Wrap provider, scaling each std by an independent seeded factor per (state, action)"""
    return PerturbedSigmaProvider(provider, env, rho_percent, seed)


class OracleSpec(BaseModel):
    """How an experiment builds its value oracle"""
    kind: Literal["gt", "fixed", "noised"] = Field(default="gt", description="gt, fixed or noised sigma")
    error_scale: float = Field(default=0.5, description="CorruptedPredictor error scale")
    error_floor: float = Field(default=DEFAULT_ERROR_FLOOR, description="Error floor added to |Q_GT|")
    fixed_sigma: float = Field(default=1.0, description="Constant std for the fixed kind")
    rho_percent: float = Field(default=20.0, description="Sigma perturbation width for the noised kind")

    @field_validator('error_scale', 'error_floor', 'fixed_sigma')
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError('oracle scales must be non-negative')
        return v

    @field_validator('rho_percent')
    @classmethod
    def validate_rho(cls, v):
        if v < 0 or v > 100:
            raise ValueError('rho_percent must be between 0 and 100')
        return v


def build_provider(env: DecisionProcess, spec: OracleSpec, seed: int) -> QueryProvider:
    """Construct the provider described by spec for env"""
    predictor = CorruptedPredictor(env, spec.error_scale, seed, spec.error_floor)
    if spec.kind == "fixed":
        return FixedSigmaProvider(predictor, spec.fixed_sigma)
    provider = GroundTruthSigmaProvider(predictor)
    if spec.kind == "noised":
        return PerturbedSigmaProvider(provider, env, spec.rho_percent, seed)
    return provider
