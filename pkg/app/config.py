"""
Configuration settings for the bayes-tree-planner engine
"""
import logging
from typing import Any, Dict

from pydantic import Field, field_validator
from pydantic_settings import BaseSettings, SettingsConfigDict


class Settings(BaseSettings):
    """Process-wide settings loaded from BAYESPLAN_* environment variables"""

    # Logging
    log_level: str = Field(
        default="INFO",
        description="Root logging level"
    )

    # Parallelism
    max_workers: int = Field(
        default=1,
        description="Worker processes used by the experiment orchestrator"
    )

    # Posterior algebra
    bins_m: int = Field(
        default=50,
        description="Number of CDF bins used by max-backup"
    )
    exact_posterior_ops: bool = Field(
        default=False,
        description="Use exact-CDF quantiles and sampling instead of Gaussian moment matching"
    )

    # Maze environment
    maze_width: int = Field(
        default=15,
        description="Maze grid width (odd)"
    )
    maze_height: int = Field(
        default=15,
        description="Maze grid height (odd)"
    )
    maze_horizon: int = Field(
        default=50,
        description="Search depth cap H for mazes"
    )

    # Harness
    step_cap: int = Field(
        default=200,
        description="Episode step cap k"
    )
    predictor_error_floor: float = Field(
        default=0.1,
        description="Noise floor of the corrupted value predictor"
    )
    results_dir: str = Field(
        default="results",
        description="Default directory for experiment outputs"
    )
    record_wall_time: bool = Field(
        default=False,
        description="Write wall-clock milliseconds into result rows (breaks byte-identical reruns)"
    )

    # Monitoring
    memory_warning_percent: float = Field(
        default=85.0,
        description="System memory usage that triggers a health warning"
    )

    # Validation
    @field_validator('log_level')
    @classmethod
    def validate_log_level(cls, v):
        valid_levels = ['DEBUG', 'INFO', 'WARNING', 'ERROR', 'CRITICAL']
        if v.upper() not in valid_levels:
            raise ValueError(f'log_level must be one of {valid_levels}')
        return v.upper()

    @field_validator('max_workers')
    @classmethod
    def validate_max_workers(cls, v):
        if v < 1 or v > 256:
            raise ValueError('max_workers must be between 1 and 256')
        return v

    @field_validator('bins_m')
    @classmethod
    def validate_bins(cls, v):
        if v < 2:
            raise ValueError('bins_m must be at least 2')
        return v

    @field_validator('maze_width', 'maze_height')
    @classmethod
    def validate_maze_size(cls, v):
        if v < 3 or v % 2 == 0:
            raise ValueError('maze dimensions must be odd and at least 3')
        return v

    @field_validator('maze_horizon', 'step_cap')
    @classmethod
    def validate_positive(cls, v):
        if v < 1:
            raise ValueError('horizon and step cap must be positive')
        return v

    @field_validator('predictor_error_floor')
    @classmethod
    def validate_error_floor(cls, v):
        if v < 0:
            raise ValueError('predictor_error_floor must be non-negative')
        return v

    # Helper methods
    def get_posterior_config(self) -> Dict[str, Any]:
        """Get posterior algebra configuration"""
        return {
            "bins_m": self.bins_m,
            "exact": self.exact_posterior_ops
        }

    def get_maze_config(self) -> Dict[str, int]:
        """Get maze generation configuration"""
        return {
            "width": self.maze_width,
            "height": self.maze_height,
            "horizon": self.maze_horizon
        }

    def get_harness_config(self) -> Dict[str, Any]:
        """Get experiment harness configuration"""
        return {
            "step_cap": self.step_cap,
            "max_workers": self.max_workers,
            "results_dir": self.results_dir,
            "record_wall_time": self.record_wall_time,
            "error_floor": self.predictor_error_floor
        }

    def log_configuration_status(self):
        """Log the configuration status for debugging"""
        logger = logging.getLogger(__name__)

        logger.info(f"🔧 Configuration loaded (log level {self.log_level})")
        logger.info(f"📊 Posterior: M={self.bins_m} bins, exact ops {'on' if self.exact_posterior_ops else 'off'}")
        logger.info(f"🧭 Maze {self.maze_width}x{self.maze_height}, horizon {self.maze_horizon}, step cap {self.step_cap}")
        logger.info(f"  {'✅' if self.max_workers > 1 else '⚠️'} Workers: {self.max_workers}")

    model_config = SettingsConfigDict(
        env_prefix="BAYESPLAN_",
        env_file=".env",
        env_file_encoding="utf-8",
        case_sensitive=False,
        validate_assignment=True,
        extra="ignore"
    )


# Global settings instance
_settings = None

def get_settings() -> Settings:
    """Get application settings (singleton pattern)"""
    global _settings
    if _settings is None:
        _settings = Settings()
    return _settings
