"""
Experiment Orchestrator - Runs planner sweeps over environment suites
Expands an ExperimentSpec into cells, runs them (optionally in worker
processes) and writes rows in cell order so output never depends on scheduling
"""
import asyncio
import logging
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass
from typing import Any, Dict, List, Optional

from app.config import get_settings
from app.environments.maze import MazeEnv, maze_generate
from app.environments.tree import needle_tree
from app.harness.episode import online_episode
from app.harness.models import ExperimentSpec, ResultRecord
from app.oracles.providers import build_provider
from app.utils.monitoring import global_monitor
from app.utils.results_store import ResultsStore
from app.utils.seeding import derive_seed

# Configure logging
logger = logging.getLogger(__name__)

PLANNER_SEED_MODULUS = 2 ** 32


@dataclass(frozen=True)
class ExperimentCell:
    """One (planner, budget, env seed, repetition) combination"""
    index: int
    planner_index: int
    budget: int
    env_seed: int
    rep: int


def expand_cells(spec: ExperimentSpec) -> List[ExperimentCell]:
    """Cartesian product in planner, budget, env seed, repetition order"""
    cells = []
    for p_idx, _ in enumerate(spec.planners):
        for budget in spec.budgets:
            for env_seed in spec.env_seeds:
                for rep in range(spec.repetitions):
                    cells.append(ExperimentCell(len(cells), p_idx, budget, env_seed, rep))
    return cells


def make_environment(spec: ExperimentSpec, env_seed: int):
    """Environment instance for one generation seed"""
    if spec.env_family == "needle":
        env, _ = needle_tree(env_seed, spec.tree_depth, spec.tree_branching)
        return env
    return MazeEnv(maze_generate(env_seed, spec.maze_width, spec.maze_height), spec.horizon)


def run_cell(spec: ExperimentSpec, cell: ExperimentCell, record_wall_time: bool = False) -> Dict[str, Any]:
    """Run one episode; all randomness derives from (spec seed, env seed, planner, repetition)"""
    entry = spec.planners[cell.planner_index]
    episode_seed = derive_seed(spec.seed, cell.env_seed, cell.planner_index, cell.rep)
    cfg = entry.config.model_copy(update={
        "budget_T": cell.budget,
        "seed": episode_seed % PLANNER_SEED_MODULUS
    })
    env = make_environment(spec, cell.env_seed)
    oracle = build_provider(env, spec.oracle, cell.env_seed)

    started = time.perf_counter()
    result = online_episode(env, cfg, oracle, spec.step_cap, episode_seed)
    wall_ms = (time.perf_counter() - started) * 1000.0

    solved = result.solved
    if spec.env_family == "needle":
        solved = solved and result.total_reward > 0
    record = ResultRecord(
        planner=entry.name,
        budget=cell.budget,
        env_seed=cell.env_seed,
        rep=cell.rep,
        solved=solved,
        steps=result.steps_taken,
        mean_regret=result.mean_regret,
        wall_ms=wall_ms if record_wall_time else None,
        total_reward=result.total_reward
    )
    return record.to_row()


def run_cell_logged(spec: ExperimentSpec, cell: ExperimentCell, record_wall_time: bool = False) -> Dict[str, Any]:
    try:
        return run_cell(spec, cell, record_wall_time)
    except Exception as e:
        logger.error(f"❌ Cell {cell.index} ({spec.planners[cell.planner_index].name}, "
                     f"T={cell.budget}, env={cell.env_seed}, rep={cell.rep}) failed: {e}")
        raise


class ExperimentOrchestrator:
    """
    Runs experiment sweeps
    Resumes from an existing results file and writes rows in cell order
    """

    def __init__(self, max_workers: Optional[int] = None):
        self.harness_config = get_settings().get_harness_config()
        self.max_workers = max_workers or self.harness_config["max_workers"]
        logger.info(f"🔍 Experiment orchestrator ready ({self.max_workers} workers)")

    async def run_experiment(self, spec: ExperimentSpec, output: Optional[str] = None) -> Dict[str, Any]:
        """
        Execute every cell of the spec not already present in the results file

        Args:
            spec: Experiment specification
            output: CSV path overriding spec.output

        Returns:
            Run summary with the number of computed and skipped cells and the per-cell summary
        """
        store = ResultsStore(output or spec.output)
        store.ensure_writable()

        done = store.completed_keys()
        cells = expand_cells(spec)
        pending = [
            cell for cell in cells
            if (spec.planners[cell.planner_index].name, cell.budget, cell.env_seed, cell.rep) not in done
        ]
        record_wall_time = spec.record_wall_time or self.harness_config["record_wall_time"]
        logger.info(
            f"🚀 Experiment '{spec.name}': {len(cells)} cells, {len(cells) - len(pending)} already done, "
            f"{len(pending)} to run"
        )

        started = time.perf_counter()
        batch_size = max(1, self.max_workers * 4)
        if self.max_workers > 1 and pending:
            loop = asyncio.get_running_loop()
            with ProcessPoolExecutor(max_workers=self.max_workers) as pool:
                for start in range(0, len(pending), batch_size):
                    batch = pending[start:start + batch_size]
                    rows = await asyncio.gather(*[
                        loop.run_in_executor(pool, run_cell_logged, spec, cell, record_wall_time) for cell in batch
                    ])
                    store.append(rows)
        else:
            for start in range(0, len(pending), batch_size):
                batch = pending[start:start + batch_size]
                store.append([run_cell_logged(spec, cell, record_wall_time) for cell in batch])
                await asyncio.sleep(0)

        summary = store.write_summary()
        duration_ms = (time.perf_counter() - started) * 1000.0
        logger.info(f"✅ Experiment '{spec.name}' finished: {len(pending)} cells in {duration_ms / 1000:.1f}s")
        return {
            "name": spec.name,
            "cells": len(cells),
            "computed": len(pending),
            "skipped": len(cells) - len(pending),
            "csv": str(store.csv_path),
            "summary_path": str(store.summary_path),
            "summary": summary,
            "health": global_monitor.health_check()
        }


async def run_experiment(spec: ExperimentSpec, output: Optional[str] = None,
                         max_workers: Optional[int] = None) -> Dict[str, Any]:
    """Standalone function to run an experiment sweep"""
    orchestrator = ExperimentOrchestrator(max_workers)
    return await orchestrator.run_experiment(spec, output)
