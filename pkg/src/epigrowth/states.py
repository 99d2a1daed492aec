"""Plain state containers shared by the dynamics, equilibria and planner modules."""

from __future__ import annotations

from dataclasses import astuple, dataclass

import numpy as np


@dataclass(frozen=True)
class EpiState:
    """Population fractions (susceptible, infected, recovered, vaccinated)."""

    s: float
    i: float
    r: float
    v: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, y) -> "EpiState":
        return cls(*(float(x) for x in y))

    @property
    def total(self) -> float:
        return self.s + self.i + self.r + self.v


@dataclass(frozen=True)
class RawState:
    """Head counts; ``N`` is carried separately from the compartments."""

    S: float
    I: float
    R: float
    V: float
    N: float

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    def fractions(self) -> EpiState:
        return EpiState(self.S / self.N, self.I / self.N, self.R / self.N, self.V / self.N)


@dataclass(frozen=True)
class PlannerState:
    """Planner state (k, h, s, i, e).  Effective labour is ``l = 1 - i``."""

    k: float
    h: float
    s: float
    i: float
    e: float

    def __post_init__(self):
        if self.k <= 0:
            raise ValueError(f"k must be > 0, got {self.k}")

    @property
    def l(self) -> float:
        return 1.0 - self.i

    def as_array(self) -> np.ndarray:
        return np.array(astuple(self), dtype=float)

    @classmethod
    def from_array(cls, y) -> "PlannerState":
        return cls(*(float(x) for x in y))
