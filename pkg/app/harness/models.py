"""
Harness data models: episodes, experiment specifications and result rows
"""
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional

from pydantic import BaseModel, Field, field_validator, model_validator

from app.config import get_settings
from app.oracles.providers import OracleSpec
from app.planners.models import PlannerConfig


def _maze_default(key: str):
    return lambda: get_settings().get_maze_config()[key]


def _harness_default(key: str):
    return lambda: get_settings().get_harness_config()[key]


def _default_output() -> str:
    return str(Path(get_settings().get_harness_config()["results_dir"]) / "experiment.csv")


def _default_oracle() -> OracleSpec:
    return OracleSpec(error_floor=get_settings().get_harness_config()["error_floor"])


@dataclass
class EpisodeResult:
    """Outcome of one online-planning episode"""
    solved: bool
    steps_taken: int
    committed_actions: List[int]
    per_step_search_stats: List[Dict[str, Any]]
    seed: int
    total_reward: float = 0.0
    mean_regret: float = 0.0
    final_state: Any = None
    step_regrets: List[float] = field(default_factory=list)


class PlannerEntry(BaseModel):
    """A named planner configuration inside an experiment"""
    name: str = Field(..., description="Label written to the planner column")
    config: PlannerConfig = Field(default_factory=PlannerConfig)

    @field_validator('name')
    @classmethod
    def validate_name(cls, v):
        if not v.strip() or ',' in v:
            raise ValueError('planner names must be non-empty and contain no commas')
        return v.strip()


class ExperimentSpec(BaseModel):
    """Cartesian sweep of planners x budgets x environment seeds x repetitions"""
    name: str = Field(default="experiment", description="Experiment label")
    seed: int = Field(default=0, description="Experiment seed mixed into every cell's streams")
    env_family: Literal["maze", "needle"] = Field(default="maze", description="Environment family")
    env_seeds: List[int] = Field(default_factory=lambda: [0], description="Environment generation seeds")
    maze_width: int = Field(default_factory=_maze_default("width"), description="Maze width")
    maze_height: int = Field(default_factory=_maze_default("height"), description="Maze height")
    horizon: int = Field(default_factory=_maze_default("horizon"), description="Search depth cap for mazes")
    tree_depth: int = Field(default=4, description="Needle tree depth")
    tree_branching: int = Field(default=2, description="Needle tree branching")
    planners: List[PlannerEntry] = Field(default_factory=list, description="Planner configurations")
    budgets: List[int] = Field(default_factory=lambda: [50], description="Search budgets T")
    step_cap: int = Field(default_factory=_harness_default("step_cap"), description="Episode step cap k")
    oracle: OracleSpec = Field(default_factory=_default_oracle, description="Value oracle")
    repetitions: int = Field(default=1, description="Repetitions per (planner, budget, env seed)")
    output: str = Field(default_factory=_default_output, description="CSV output path")
    record_wall_time: bool = Field(default=False, description="Fill the wall_ms column")

    @field_validator('budgets')
    @classmethod
    def validate_budgets(cls, v):
        if not v or any(b < 1 for b in v):
            raise ValueError('budgets must be a non-empty list of positive integers')
        return v

    @field_validator('env_seeds')
    @classmethod
    def validate_seeds(cls, v):
        if not v or any(s < 0 for s in v):
            raise ValueError('env_seeds must be a non-empty list of non-negative integers')
        return v

    @field_validator('step_cap', 'repetitions', 'horizon', 'tree_depth')
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('step_cap, repetitions, horizon and tree_depth must be positive')
        return v

    @model_validator(mode='after')
    def validate_planners(self):
        if not self.planners:
            raise ValueError('an experiment needs at least one planner')
        names = [p.name for p in self.planners]
        if len(set(names)) != len(names):
            raise ValueError(f'planner names must be unique, got {names}')
        return self

    @property
    def n_cells(self) -> int:
        return len(self.planners) * len(self.budgets) * len(self.env_seeds) * self.repetitions


class ResultRecord(BaseModel):
    """One CSV row"""
    planner: str
    budget: int
    env_seed: int
    rep: int
    solved: bool
    steps: int
    mean_regret: float
    wall_ms: Optional[float] = None
    total_reward: float = 0.0

    def to_row(self) -> Dict[str, Any]:
        return {
            "planner": self.planner,
            "budget": self.budget,
            "env_seed": self.env_seed,
            "rep": self.rep,
            "solved": int(self.solved),
            "steps": self.steps,
            "mean_regret": f"{self.mean_regret:.6f}",
            "wall_ms": "" if self.wall_ms is None else f"{self.wall_ms:.3f}",
            "total_reward": f"{self.total_reward:g}"
        }
