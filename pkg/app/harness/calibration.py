"""
Predictor error calibration against the greedy reference planner
"""
import json
import logging
from pathlib import Path
from typing import List, Sequence

from pydantic import BaseModel, Field, ValidationError, field_validator

from app.environments.maze import MazeEnv, maze_generate
from app.errors import InvalidArgumentError, InvalidConfigError, ResultsStoreError
from app.harness.episode import online_episode
from app.oracles.providers import OracleSpec, build_provider
from app.planners.models import Algorithm, PlannerConfig

# Configure logging
logger = logging.getLogger(__name__)

GREEDY_CONFIG = PlannerConfig(algorithm=Algorithm.GREEDY, budget_T=1)


def greedy_success_rate(seeds: Sequence[int], error_scale: float, width: int = 15, height: int = 15,
                        horizon: int = 50, step_cap: int = 200, error_floor: float = 0.1) -> float:
    """Fraction of mazes the greedy planner solves with a predictor of the given error scale"""
    spec = OracleSpec(kind="gt", error_scale=error_scale, error_floor=error_floor)
    solved = 0
    for seed in seeds:
        env = MazeEnv(maze_generate(seed, width, height), horizon)
        result = online_episode(env, GREEDY_CONFIG, build_provider(env, spec, seed), step_cap, seed)
        solved += int(result.solved)
    return solved / len(seeds)


def tune_error_scale(seeds: Sequence[int], target: float = 0.6, low: float = 0.0, high: float = 4.0,
                     iterations: int = 10, **maze_kwargs) -> float:
    """
    Bisect the smallest error scale at which greedy success drops below target

    Args:
        seeds: Calibration maze seeds (the training split)
        target: Success rate greedy must fall below
        low: Scale assumed to keep greedy at or above target
        high: Scale assumed to push greedy below target
        iterations: Bisection steps
        **maze_kwargs: Forwarded to greedy_success_rate

    Returns:
        An error scale whose greedy success rate is below target
    """
    if not seeds:
        raise InvalidArgumentError("calibration needs at least one maze seed")
    if greedy_success_rate(seeds, low, **maze_kwargs) < target:
        return low
    high_rate = greedy_success_rate(seeds, high, **maze_kwargs)
    if high_rate >= target:
        logger.warning(f"⚠️ Greedy still solves {high_rate:.0%} at error scale {high}; returning it anyway")
        return high

    for _ in range(iterations):
        mid = 0.5 * (low + high)
        rate = greedy_success_rate(seeds, mid, **maze_kwargs)
        logger.debug(f"📊 error_scale={mid:.4f}: greedy success {rate:.3f}")
        if rate < target:
            high = mid
        else:
            low = mid
    logger.info(f"✅ Calibrated error scale {high:.4f} (greedy below {target:.0%})")
    return high


class CalibrationRecord(BaseModel):
    """A tuned error scale and the greedy success rate measured at it"""
    error_scale: float = Field(..., description="Tuned CorruptedPredictor error scale")
    greedy_success: float = Field(..., description="Greedy success rate at error_scale")
    target: float = Field(default=0.6, description="Rate greedy had to fall below")
    seeds: List[int] = Field(default_factory=list, description="Calibration maze seeds")
    width: int = 15
    height: int = 15
    horizon: int = 50
    step_cap: int = 200
    error_floor: float = 0.1

    @field_validator('error_scale', 'error_floor')
    @classmethod
    def validate_non_negative(cls, v):
        if v < 0:
            raise ValueError('error_scale and error_floor must be non-negative')
        return v

    @property
    def below_target(self) -> bool:
        return self.greedy_success < self.target


def calibrate(seeds: Sequence[int], target: float = 0.6, iterations: int = 10, width: int = 15,
              height: int = 15, horizon: int = 50, step_cap: int = 200,
              error_floor: float = 0.1) -> CalibrationRecord:
    """Tune the error scale on the given seeds and measure greedy once more at the result"""
    maze_kwargs = dict(width=width, height=height, horizon=horizon, step_cap=step_cap, error_floor=error_floor)
    scale = tune_error_scale(seeds, target=target, iterations=iterations, **maze_kwargs)
    rate = greedy_success_rate(seeds, scale, **maze_kwargs)
    return CalibrationRecord(error_scale=scale, greedy_success=rate, target=target, seeds=list(seeds), **maze_kwargs)


def save_calibration(record: CalibrationRecord, path: str) -> Path:
    target = Path(path)
    try:
        target.parent.mkdir(parents=True, exist_ok=True)
        target.write_text(json.dumps(record.model_dump(), indent=2))
    except OSError as e:
        raise ResultsStoreError(f"cannot write calibration record {target}: {e}")
    logger.info(f"💾 Calibration record written to {target}")
    return target


def load_calibration(path: str) -> CalibrationRecord:
    """Read a record written by save_calibration"""
    try:
        data = json.loads(Path(path).read_text())
        return CalibrationRecord(**data)
    except OSError as e:
        raise InvalidConfigError(f"cannot read calibration record {path}: {e}")
    except (ValueError, TypeError, ValidationError) as e:
        raise InvalidConfigError(f"malformed calibration record {path}: {e}")
