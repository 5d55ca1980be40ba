"""
Deterministic decision process interface
"""
from abc import ABC, abstractmethod
from typing import Hashable, Sequence, Tuple

import numpy as np


class DecisionProcess(ABC):
    """Depth-H deterministic decision process with a fixed action set"""

    @abstractmethod
    def root(self) -> Hashable:
        """Initial state s0"""

    @abstractmethod
    def actions(self) -> Sequence[int]:
        """Fixed action list A, indexed 0..|A|-1"""

    @abstractmethod
    def step(self, state: Hashable, action: int) -> Tuple[Hashable, float]:
        """Deterministic transition: (next state, reward)"""

    @abstractmethod
    def is_terminal(self, state: Hashable) -> bool:
        """Whether state ends the episode"""

    @abstractmethod
    def horizon(self) -> int:
        """Depth cap H"""

    @abstractmethod
    def r_max(self) -> float:
        """Bound on absolute rewards"""

    @abstractmethod
    def state_key(self, state: Hashable) -> Tuple[int, ...]:
        """Non-negative integer key used to derive per-state random streams"""

    def gt_q(self, state: Hashable) -> np.ndarray:
        """Exact Q(state, a) per action; environments without a solver raise"""
        raise NotImplementedError(f"{type(self).__name__} has no ground-truth solver")

    @property
    def n_actions(self) -> int:
        return len(self.actions())
