"""Guided best-first head pruning under an accuracy budget.

Each iteration costs every live candidate against the oracle, prunes the
cheapest head (negative costs clamp to zero before the ledger is charged),
then walks the surviving candidates in ascending cost order and permanently
eliminates every head whose estimated contribution can no longer fit in the
remaining budget. The estimate for a head's next-iteration cost is its
clamped current cost, which never overshoots as long as pruning only gets
more expensive as more heads are removed.

The loop stops when the cheapest candidate no longer fits (its clamped cost
must be strictly below the remaining budget to commit) or no candidates are
left. Because only clamped costs are charged, the accuracy of the returned
mask can never drop more than the given budget below baseline on a
deterministic oracle.
"""

from __future__ import annotations

from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from typing import Callable, Iterable, Literal, Optional

from .errors import InternalInvariantError, OracleError
from .heads import EMPTY_MASK, Geometry, HeadIndex, Mask, all_heads, canonicalize
from .oracles import Oracle
from .solution import (
    BudgetLedger,
    EliminatedHead,
    EvalCounts,
    PrunedHead,
    PruneSolution,
    TraceRow,
    UNBOUNDED,
    build_outcomes,
)

CostMode = Literal["incremental", "baseline"]

INCREMENTAL = "incremental"
BASELINE = "baseline"

KEPT = "kept"
ELIMINATED = "eliminated"


@dataclass(frozen=True)
class CostEntry:
    post_accuracy: float
    cost: float


@dataclass
class CostTable:
    """Costs of pruning each live candidate at one iteration."""

    iteration: int
    reference_accuracy: float
    entries: dict[HeadIndex, CostEntry]
    candidate_evaluations: int

    def sorted_heads(self) -> list[tuple[HeadIndex, float]]:
        """(head, cost) pairs by ascending cost, ties in canonical order."""
        return sorted(
            ((head, entry.cost) for head, entry in self.entries.items()),
            key=lambda pair: (pair[1], pair[0]),
        )


@dataclass(frozen=True)
class EliminationRecord:
    """One survivor's verdict during the budget-fit walk."""

    head: HeadIndex
    estimate: float
    contribution: float
    running_total: float
    outcome: str


def compute_costs(
    live: Iterable[HeadIndex],
    pruned: Mask,
    oracle: Oracle,
    mode: CostMode = INCREMENTAL,
    *,
    iteration: int = 0,
    workers: int = 1,
) -> CostTable:
    """Evaluate pruning each live head on top of the already-pruned mask.

    In incremental mode costs are measured against the accuracy of the
    current pruned model; in baseline mode against the never-pruned
    baseline. Candidate results are merged in canonical head order, so a
    parallel run is indistinguishable from a serial one.
    """
    candidates = sorted(live)
    if not candidates:
        raise InternalInvariantError("compute_costs called with no live candidates")
    if mode == INCREMENTAL:
        reference = oracle.evaluate(pruned)
    else:
        reference = oracle.baseline_accuracy
    masks = [canonicalize(pruned + (head,), oracle.geometry) for head in candidates]
    if workers > 1 and len(masks) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            accuracies = list(pool.map(oracle.evaluate, masks))
    else:
        accuracies = [oracle.evaluate(mask) for mask in masks]
    entries = {
        head: CostEntry(post_accuracy=acc, cost=reference - acc)
        for head, acc in zip(candidates, accuracies)
    }
    return CostTable(iteration, reference, entries, candidate_evaluations=len(candidates))


def select_victim(costs: CostTable) -> tuple[HeadIndex, float, float]:
    """Minimum-cost head (ties broken by canonical order) with its raw and
    clamped cost. Costs below zero clamp to zero: pruning that head is free."""
    head, raw = min(
        ((h, e.cost) for h, e in costs.entries.items()),
        key=lambda pair: (pair[1], pair[0]),
    )
    return head, raw, max(0.0, raw)


def eliminate_candidates(
    survivors_sorted_by_cost: list[tuple[HeadIndex, float]],
    victim_clamped_cost: float,
    remaining_budget: float,
) -> list[EliminationRecord]:
    """Walk survivors in ascending-cost order and drop the ones that cannot fit.

    Each survivor's next-iteration cost is estimated as its clamped current
    cost; its contribution is that estimate minus the just-pruned head's
    clamped cost (never negative, since the victim had the minimum cost).
    Once the running total of contributions would exceed the remaining
    budget, that head and every costlier unvisited head are eliminated.
    """
    records: list[EliminationRecord] = []
    total = 0.0
    overflowed = False
    for head, raw_cost in survivors_sorted_by_cost:
        estimate = max(0.0, raw_cost)
        contribution = estimate - victim_clamped_cost
        if contribution < 0:
            raise InternalInvariantError(
                f"survivor {head} has estimate {estimate} below the victim cost "
                f"{victim_clamped_cost}; survivors must not be cheaper than the victim"
            )
        if not overflowed and total + contribution <= remaining_budget:
            total += contribution
            records.append(EliminationRecord(head, estimate, contribution, total, KEPT))
        else:
            overflowed = True
            records.append(EliminationRecord(head, estimate, contribution, total, ELIMINATED))
    return records


Observer = Callable[[CostTable, HeadIndex, list[EliminationRecord], BudgetLedger], None]


def astar_prune(
    geometry: Geometry,
    oracle: Oracle,
    budget: float | None,
    mode: CostMode = INCREMENTAL,
    *,
    workers: int = 1,
    observer: Optional[Observer] = None,
) -> PruneSolution:
    """Run the guided search. `budget` is in accuracy percentage points;
    None means unbounded. Returns the ordered pruned list, the eliminated
    set, the per-iteration trace and the evaluation counters."""
    return _greedy_search(geometry, oracle, budget, mode, eliminate=True,
                          strategy="astar", workers=workers, observer=observer)


def _greedy_search(
    geometry: Geometry,
    oracle: Oracle,
    budget: float | None,
    mode: CostMode,
    *,
    eliminate: bool,
    strategy: str,
    workers: int = 1,
    observer: Optional[Observer] = None,
) -> PruneSolution:
    if geometry != oracle.geometry:
        raise InternalInvariantError(
            f"search geometry {geometry} does not match oracle geometry {oracle.geometry}"
        )
    given = UNBOUNDED if budget is None else float(budget)
    ledger = BudgetLedger(given)
    live: set[HeadIndex] = set(all_heads(geometry))
    pruned_mask: Mask = EMPTY_MASK
    pruned: list[PrunedHead] = []
    eliminated: list[EliminatedHead] = []
    last_costs: dict[HeadIndex, float] = {}
    trace: list[TraceRow] = []
    accuracy = oracle.baseline_accuracy
    candidate_evaluations = 0
    requested0, computed0 = oracle.counter.requested, oracle.counter.computed

    def finish() -> PruneSolution:
        return PruneSolution(
            strategy=strategy,
            cost_mode=mode,
            geometry=geometry,
            baseline_accuracy=oracle.baseline_accuracy,
            final_accuracy=accuracy,
            budget=ledger,
            pruned=tuple(pruned),
            eliminated=tuple(eliminated),
            outcomes=build_outcomes(
                geometry,
                {p.head: p.raw_cost for p in pruned},
                {e.head: last_costs[e.head] for e in eliminated},
                last_costs,
            ),
            trace=tuple(trace),
            evals=EvalCounts(
                requested=oracle.counter.requested - requested0,
                computed=oracle.counter.computed - computed0,
                candidate_evaluations=candidate_evaluations,
            ),
        )

    iteration = 0
    while ledger.remaining > 0 and live:
        iteration += 1
        if iteration > geometry.total_heads + 1:
            raise InternalInvariantError(
                "pruning loop exceeded the iteration cap; live set failed to shrink"
            )
        try:
            costs = compute_costs(live, pruned_mask, oracle, mode,
                                  iteration=iteration, workers=workers)
        except OracleError as exc:
            exc.partial = finish()
            raise
        candidate_evaluations += costs.candidate_evaluations
        for head, entry in costs.entries.items():
            last_costs[head] = entry.cost
        victim, raw_cost, clamped_cost = select_victim(costs)
        if not clamped_cost < ledger.remaining:
            break
        live.remove(victim)
        pruned_mask = canonicalize(pruned_mask + (victim,), geometry)
        pruned.append(PrunedHead(victim, iteration, raw_cost, clamped_cost))
        ledger.charge(clamped_cost)
        accuracy = costs.entries[victim].post_accuracy
        records: list[EliminationRecord] = []
        if eliminate and live:
            survivors = [pair for pair in costs.sorted_heads() if pair[0] != victim]
            records = eliminate_candidates(survivors, clamped_cost, ledger.remaining)
            for record in records:
                if record.outcome == ELIMINATED:
                    live.remove(record.head)
                    eliminated.append(EliminatedHead(record.head, iteration))
        trace.append(TraceRow(
            iteration=iteration,
            pruned=(victim,),
            raw_cost=raw_cost,
            clamped_cost=clamped_cost,
            accuracy_after=accuracy,
            charged_total=ledger.charged,
            live_count=len(live),
            evaluations=costs.candidate_evaluations,
        ))
        if observer is not None:
            observer(costs, victim, records, ledger)
    return finish()
