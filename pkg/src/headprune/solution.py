"""Result types shared by every pruning strategy."""

from __future__ import annotations

import math
from dataclasses import dataclass

from .errors import InternalInvariantError
from .heads import Geometry, HeadIndex, Mask, canonicalize

UNBOUNDED = math.inf

PRUNED = "pruned"
ELIMINATED = "eliminated"
KEPT = "kept"


@dataclass
class BudgetLedger:
    """Tracks the accuracy budget: `given`, the non-negative charges so far,
    and what remains. `given` may be infinite for unbounded runs."""

    given: float
    charged: float = 0.0

    def __post_init__(self):
        if self.given < 0:
            raise ValueError(f"budget must be non-negative, got {self.given}")

    @property
    def remaining(self) -> float:
        return self.given - self.charged

    def charge(self, amount: float) -> None:
        if amount < 0:
            raise InternalInvariantError(f"ledger charge must be non-negative, got {amount}")
        self.charged += amount


@dataclass(frozen=True)
class TraceRow:
    """One committed pruning step. `pruned` holds a single head for per-head
    strategies and a whole column for column moves; `evaluations` counts the
    candidate evaluations spent this iteration."""

    iteration: int
    pruned: Mask
    raw_cost: float
    clamped_cost: float
    accuracy_after: float
    charged_total: float
    live_count: int
    evaluations: int


@dataclass(frozen=True)
class PrunedHead:
    head: HeadIndex
    iteration: int
    raw_cost: float
    clamped_cost: float


@dataclass(frozen=True)
class EliminatedHead:
    head: HeadIndex
    iteration: int


@dataclass(frozen=True)
class HeadOutcome:
    """Final label for one head plus the last cost observed for it (None if
    the head was never costed, e.g. untouched heads of a random trial)."""

    head: HeadIndex
    label: str
    last_cost: float | None


@dataclass(frozen=True)
class EvalCounts:
    requested: int
    computed: int
    candidate_evaluations: int


@dataclass
class PruneSolution:
    strategy: str
    cost_mode: str
    geometry: Geometry
    baseline_accuracy: float
    final_accuracy: float
    budget: BudgetLedger
    pruned: tuple[PrunedHead, ...]
    eliminated: tuple[EliminatedHead, ...]
    outcomes: tuple[HeadOutcome, ...]
    trace: tuple[TraceRow, ...]
    evals: EvalCounts

    @property
    def pruned_mask(self) -> Mask:
        return canonicalize((p.head for p in self.pruned), self.geometry)

    @property
    def pruned_count(self) -> int:
        return len(self.pruned)

    @property
    def eliminated_heads(self) -> set[HeadIndex]:
        return {e.head for e in self.eliminated}


def build_outcomes(
    geometry: Geometry,
    pruned: dict[HeadIndex, float],
    eliminated: dict[HeadIndex, float],
    last_costs: dict[HeadIndex, float],
) -> tuple[HeadOutcome, ...]:
    """Assemble the per-head outcome table in canonical head order."""
    from .heads import all_heads

    rows = []
    for head in all_heads(geometry):
        if head in pruned:
            rows.append(HeadOutcome(head, PRUNED, pruned[head]))
        elif head in eliminated:
            rows.append(HeadOutcome(head, ELIMINATED, eliminated[head]))
        else:
            rows.append(HeadOutcome(head, KEPT, last_costs.get(head)))
    return tuple(rows)
