"""
Seed derivation for reproducible experiments

Every random stream is derived from a tuple of integers, never from the order
in which work happens to be scheduled.
"""
from typing import List, Tuple

import numpy as np

from app.errors import InvalidArgumentError

SEED_SPACE = 2 ** 31
N_TRAIN_SEEDS = 150
N_TEST_SEEDS = 500


def derive_seed(*components: int) -> int:
    """64-bit seed mixed from integer components (experiment, env, planner, repetition, step)"""
    if any(int(c) < 0 for c in components):
        raise InvalidArgumentError(f"seed components must be non-negative, got {components}")
    sequence = np.random.SeedSequence([int(c) for c in components])
    return int(sequence.generate_state(1, np.uint64)[0])


def derive_rng(*components: int) -> np.random.Generator:
    return np.random.default_rng(derive_seed(*components))


def standard_seed_split(base_seed: int = 0) -> Tuple[List[int], List[int]]:
    """Disjoint (train, test) environment seed sets of 150 and 500 seeds"""
    rng = np.random.default_rng(base_seed)
    seeds = rng.choice(SEED_SPACE, size=N_TRAIN_SEEDS + N_TEST_SEEDS, replace=False)
    seeds = [int(s) for s in seeds]
    return seeds[:N_TRAIN_SEEDS], seeds[N_TRAIN_SEEDS:]
