"""Bounded, grid-quantized parameter spaces.

Optimizers work on integer grid indices so that equality tests (tabu list,
caches) are exact; values are only materialized for the objective.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np


@dataclass(frozen=True)
class Param:
    name: str
    lower: float
    upper: float
    step: float

    def __post_init__(self):
        if not self.upper > self.lower:
            raise ValueError(f"{self.name}: upper must exceed lower")
        if not self.step > 0:
            raise ValueError(f"{self.name}: step must be > 0")
        n = (self.upper - self.lower) / self.step
        if abs(n - round(n)) > 1e-9 * max(1.0, n):
            raise ValueError(f"{self.name}: range is not a whole number of steps")

    @property
    def intervals(self) -> int:
        return int(round((self.upper - self.lower) / self.step))

    def value(self, index: int) -> float:
        # round away representation noise so values compare equal to literals
        return round(self.lower + index * self.step, 10)

    def index(self, value: float) -> int:
        """Nearest grid index, clamped to bounds."""
        i = int(round((value - self.lower) / self.step))
        return min(max(i, 0), self.intervals)

    def on_grid(self, value: float) -> bool:
        if value < self.lower - 1e-9 or value > self.upper + 1e-9:
            return False
        return abs(self.value(self.index(value)) - value) < 1e-9


class Space:
    """Cartesian product of gridded parameters."""

    def __init__(self, params: Sequence[Param]):
        self.params = tuple(params)
        self.names = tuple(p.name for p in self.params)
        self.upper_index = np.array([p.intervals for p in self.params])

    def __len__(self) -> int:
        return len(self.params)

    def __repr__(self) -> str:
        return f"Space({list(self.params)!r})"

    def values(self, idx: Sequence[int]) -> tuple[float, ...]:
        return tuple(p.value(int(i)) for p, i in zip(self.params, idx))

    def indices(self, values: Sequence[float]) -> tuple[int, ...]:
        return tuple(p.index(v) for p, v in zip(self.params, values))

    def clamp(self, idx: Sequence[int]) -> tuple[int, ...]:
        return tuple(int(min(max(i, 0), n)) for i, n in zip(idx, self.upper_index))

    def contains(self, idx: Sequence[int]) -> bool:
        return all(0 <= i <= n for i, n in zip(idx, self.upper_index))

    def random_index(self, rng: np.random.Generator) -> tuple[int, ...]:
        return tuple(int(rng.integers(0, n + 1)) for n in self.upper_index)
