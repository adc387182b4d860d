"""Finite scopes and solver results."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Optional

from ..constraints.evaluate import Assignment
from ..interpreter import TestInput


@dataclass(frozen=True)
class Scope:
    bitwidth: int = 4
    max_rows: int = 4
    max_list_len: int = 4
    seed: int = 0
    time_budget: float = 60.0  # seconds

    def __post_init__(self):
        if self.bitwidth < 2:
            raise ValueError("bitwidth must be >= 2")
        if min(self.max_rows, self.max_list_len, self.seed) < 0 or self.time_budget < 0:
            raise ValueError("scope bounds must be >= 0")


SAT = "sat"
UNSAT = "unsat"
EXHAUSTED = "resource_exhausted"


@dataclass
class SolveResult:
    status: str
    assignment: Optional[Assignment] = None
    test_input: Optional[TestInput] = None
    stage: str = "search"  # 'presolve' when decided without the SAT backend
    millis: float = 0.0
    stats: dict = field(default_factory=dict)

    @property
    def sat(self) -> bool:
        return self.status == SAT

    @property
    def unsat(self) -> bool:
        return self.status == UNSAT
