"""
Procedural grid mazes with exact shortest-path values

Grids have rooms at even coordinates and walls or passages at odd ones, so a
width x height maze (both odd) has ((width+1)/2) x ((height+1)/2) rooms. The
outer boundary acts as a wall. Every step pays -1 until the goal is reached;
moving into a wall leaves the agent in place.
"""
import logging
from collections import deque
from dataclasses import dataclass
from enum import IntEnum
from functools import cached_property
from typing import List, Sequence, Tuple

import numpy as np

from app.environments.base import DecisionProcess
from app.errors import GenerationError, InvalidArgumentError, InvalidParameterError

# Configure logging
logger = logging.getLogger(__name__)

Cell = Tuple[int, int]

STEP_REWARD = -1.0
WALL, FLOOR = 1, 0
UNREACHABLE = -1


class Action(IntEnum):
    """Grid moves"""
    UP = 0
    DOWN = 1
    LEFT = 2
    RIGHT = 3


ACTION_DELTAS = {
    Action.UP: (-1, 0),
    Action.DOWN: (1, 0),
    Action.LEFT: (0, -1),
    Action.RIGHT: (0, 1)
}


@dataclass(frozen=True, eq=False)
class MazeInstance:
    """A generated maze: wall grid (1 = wall), start and goal cells"""
    width: int
    height: int
    walls: np.ndarray
    start: Cell
    goal: Cell
    seed: int

    def __post_init__(self):
        walls = np.array(self.walls, dtype=np.uint8)
        if walls.shape != (self.height, self.width):
            raise InvalidParameterError(
                f"wall grid shape {walls.shape} does not match {self.height}x{self.width}"
            )
        for name, cell in (("start", self.start), ("goal", self.goal)):
            if not self.is_floor(cell, walls):
                raise InvalidParameterError(f"{name} cell {cell} is not a floor cell")
        walls.setflags(write=False)
        object.__setattr__(self, "walls", walls)

    def is_floor(self, cell: Cell, walls: np.ndarray = None) -> bool:
        grid = self.walls if walls is None else walls
        row, col = cell
        return 0 <= row < self.height and 0 <= col < self.width and grid[row, col] == FLOOR

    @cached_property
    def distance_map(self) -> np.ndarray:
        """BFS distance to the goal for every cell (UNREACHABLE for walls and cut-off cells)"""
        return bfs_distances(self.walls, self.goal)

    def to_text(self) -> str:
        """Plain-text grid: '#' wall, '.' floor, 'S' start, 'G' goal"""
        rows = []
        for row in range(self.height):
            chars = []
            for col in range(self.width):
                if (row, col) == self.start:
                    chars.append("S")
                elif (row, col) == self.goal:
                    chars.append("G")
                else:
                    chars.append("#" if self.walls[row, col] == WALL else ".")
            rows.append("".join(chars))
        return "\n".join(rows)

    @classmethod
    def from_text(cls, text: str, seed: int = 0) -> "MazeInstance":
        """Parse the plain-text grid format"""
        lines = [line.rstrip() for line in text.strip().splitlines()]
        if not lines or len({len(line) for line in lines}) != 1:
            raise InvalidArgumentError("maze text must be a non-empty rectangle")
        height, width = len(lines), len(lines[0])
        walls = np.zeros((height, width), dtype=np.uint8)
        start = goal = None
        for row, line in enumerate(lines):
            for col, char in enumerate(line):
                if char == "#":
                    walls[row, col] = WALL
                elif char == "S":
                    start = (row, col)
                elif char == "G":
                    goal = (row, col)
                elif char != ".":
                    raise InvalidArgumentError(f"unexpected maze character {char!r} at ({row}, {col})")
        if start is None or goal is None:
            raise InvalidArgumentError("maze text needs exactly one 'S' and one 'G'")
        return cls(width, height, walls, start, goal, seed)


def neighbours(walls: np.ndarray, cell: Cell) -> List[Cell]:
    """Floor cells one move away"""
    height, width = walls.shape
    row, col = cell
    result = []
    for d_row, d_col in ACTION_DELTAS.values():
        r, c = row + d_row, col + d_col
        if 0 <= r < height and 0 <= c < width and walls[r, c] == FLOOR:
            result.append((r, c))
    return result


def bfs_distances(walls: np.ndarray, source: Cell) -> np.ndarray:
    """Shortest-path lengths from source over floor cells"""
    distances = np.full(walls.shape, UNREACHABLE, dtype=np.int64)
    distances[source] = 0
    queue = deque([source])
    while queue:
        cell = queue.popleft()
        for nxt in neighbours(walls, cell):
            if distances[nxt] == UNREACHABLE:
                distances[nxt] = distances[cell] + 1
                queue.append(nxt)
    return distances


def _carve(width: int, height: int, rng: np.random.Generator) -> np.ndarray:
    """Recursive-backtracker carving over the room lattice"""
    walls = np.ones((height, width), dtype=np.uint8)
    rooms_r, rooms_c = (height + 1) // 2, (width + 1) // 2
    visited = np.zeros((rooms_r, rooms_c), dtype=bool)

    current = (int(rng.integers(rooms_r)), int(rng.integers(rooms_c)))
    visited[current] = True
    walls[2 * current[0], 2 * current[1]] = FLOOR
    stack = [current]
    while stack:
        row, col = stack[-1]
        options = [
            (row + d_row, col + d_col)
            for d_row, d_col in ACTION_DELTAS.values()
            if 0 <= row + d_row < rooms_r and 0 <= col + d_col < rooms_c
            and not visited[row + d_row, col + d_col]
        ]
        if not options:
            stack.pop()
            continue
        nxt = options[int(rng.integers(len(options)))]
        visited[nxt] = True
        walls[2 * nxt[0], 2 * nxt[1]] = FLOOR
        walls[row + nxt[0], col + nxt[1]] = FLOOR
        stack.append(nxt)
    return walls


def maze_generate(seed: int, width: int, height: int, max_retries: int = 100) -> MazeInstance:
    """
    Generate a perfect maze with start and goal far apart

    Args:
        seed: Generation seed; identical seeds give identical mazes
        width: Grid width, odd and >= 3
        height: Grid height, odd and >= 3
        max_retries: Start draws tried before giving up

    Returns:
        MazeInstance whose start-goal distance is at least (width + height) / 2
    """
    if width < 3 or height < 3 or width % 2 == 0 or height % 2 == 0:
        raise InvalidParameterError(f"maze dimensions must be odd and >= 3, got {width}x{height}")

    rng = np.random.default_rng(seed)
    walls = _carve(width, height, rng)
    floor = np.argwhere(walls == FLOOR)
    min_distance = (width + height) / 2

    for _ in range(max_retries):
        start = tuple(int(v) for v in floor[int(rng.integers(len(floor)))])
        distances = bfs_distances(walls, start)
        candidates = np.argwhere(distances >= min_distance)
        if len(candidates) == 0:
            continue
        goal = tuple(int(v) for v in candidates[int(rng.integers(len(candidates)))])
        return MazeInstance(width, height, walls, start, goal, seed)

    raise GenerationError(
        f"could not place start and goal {min_distance} apart",
        {"seed": seed, "width": width, "height": height}
    )


def maze_step(maze: MazeInstance, state: Cell, action: int) -> Tuple[Cell, float]:
    """Move one cell unless blocked; every step pays -1"""
    d_row, d_col = ACTION_DELTAS[Action(action)]
    target = (state[0] + d_row, state[1] + d_col)
    if state == maze.goal or not maze.is_floor(target):
        return state, STEP_REWARD
    return target, STEP_REWARD


def maze_gt_q(maze: MazeInstance, state: Cell, horizon: int = 50) -> np.ndarray:
    """
    Exact Q(state, a) = -(1 + shortest distance from the next cell to the goal)

    Values below -horizon, unreachable cells included, are clamped to -horizon:
    a planner with that depth cap never sees the goal from there.
    """
    if state == maze.goal:
        raise InvalidArgumentError(f"state {state} is the terminal goal cell")
    distances = maze.distance_map
    floor = -float(horizon)
    q = np.empty(len(Action))
    for action in Action:
        nxt, reward = maze_step(maze, state, action)
        distance = distances[nxt]
        q[action] = floor if distance == UNREACHABLE else max(reward - float(distance), floor)
    return q


class MazeEnv(DecisionProcess):
    """DecisionProcess view of a maze, optionally rooted away from its start cell"""

    def __init__(self, maze: MazeInstance, horizon: int = 50, start: Cell = None):
        if horizon < 1:
            raise InvalidParameterError(f"horizon must be positive, got {horizon}")
        self.maze = maze
        self._horizon = horizon
        self._start = tuple(start) if start is not None else maze.start
        self._actions = tuple(int(a) for a in Action)

    def root(self) -> Cell:
        return self._start

    def actions(self) -> Sequence[int]:
        return self._actions

    def step(self, state: Cell, action: int) -> Tuple[Cell, float]:
        return maze_step(self.maze, state, action)

    def is_terminal(self, state: Cell) -> bool:
        return state == self.maze.goal

    def horizon(self) -> int:
        return self._horizon

    def r_max(self) -> float:
        return abs(STEP_REWARD)

    def state_key(self, state: Cell) -> Tuple[int, ...]:
        return (int(state[0]), int(state[1]))

    def gt_q(self, state: Cell) -> np.ndarray:
        return maze_gt_q(self.maze, state, self._horizon)
