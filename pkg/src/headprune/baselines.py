"""Comparison strategies: exhaustive greedy, column-wise greedy, random order.

Local pruning re-costs every unpruned head each round and prunes the
cheapest, so a full run over m heads spends m(m+1)/2 candidate evaluations.
Global pruning removes one head position across all layers per move, n(n+1)/2
evaluations for n positions. Random pruning draws a seeded permutation and
prunes a prefix of it, stopping before the first head that would push the
total accuracy drop past the budget.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .astar import CostMode, INCREMENTAL, Observer, _greedy_search
from .errors import OracleError
from .heads import EMPTY_MASK, Geometry, HeadIndex, Mask, all_heads, canonicalize, column
from .oracles import Oracle
from .solution import (
    BudgetLedger,
    EvalCounts,
    PrunedHead,
    PruneSolution,
    TraceRow,
    UNBOUNDED,
    build_outcomes,
)


def local_prune(
    geometry: Geometry,
    oracle: Oracle,
    budget: float | None,
    mode: CostMode = INCREMENTAL,
    *,
    workers: int = 1,
    observer: Observer | None = None,
) -> PruneSolution:
    """Greedy one-head-per-round pruning without candidate elimination."""
    return _greedy_search(geometry, oracle, budget, mode, eliminate=False,
                          strategy="local", workers=workers, observer=observer)


def global_prune(
    geometry: Geometry,
    oracle: Oracle,
    budget: float | None,
    mode: CostMode = INCREMENTAL,
) -> PruneSolution:
    """Greedy column pruning: one move removes a head position from every layer.

    Each round costs the remaining columns, prunes the cheapest as a single
    move (its clamped incremental cost is one ledger charge), and stops when
    the cheapest column no longer fits the remaining budget.
    """
    given = UNBOUNDED if budget is None else float(budget)
    ledger = BudgetLedger(given)
    live_columns = list(range(geometry.heads_per_layer))
    pruned_mask: Mask = EMPTY_MASK
    pruned: list[PrunedHead] = []
    last_costs: dict[HeadIndex, float] = {}
    trace: list[TraceRow] = []
    accuracy = oracle.baseline_accuracy
    candidate_evaluations = 0
    requested0, computed0 = oracle.counter.requested, oracle.counter.computed

    def finish() -> PruneSolution:
        return PruneSolution(
            strategy="global",
            cost_mode=mode,
            geometry=geometry,
            baseline_accuracy=oracle.baseline_accuracy,
            final_accuracy=accuracy,
            budget=ledger,
            pruned=tuple(pruned),
            eliminated=(),
            outcomes=build_outcomes(
                geometry, {p.head: p.raw_cost for p in pruned}, {}, last_costs
            ),
            trace=tuple(trace),
            evals=EvalCounts(
                requested=oracle.counter.requested - requested0,
                computed=oracle.counter.computed - computed0,
                candidate_evaluations=candidate_evaluations,
            ),
        )

    iteration = 0
    while ledger.remaining > 0 and live_columns:
        iteration += 1
        try:
            if mode == INCREMENTAL:
                reference = oracle.evaluate(pruned_mask)
            else:
                reference = oracle.baseline_accuracy
            costs = []
            for j in live_columns:
                mask = canonicalize(pruned_mask + tuple(column(geometry, j)), geometry)
                post = oracle.evaluate(mask)
                candidate_evaluations += 1
                costs.append((reference - post, j, post))
        except OracleError as exc:
            exc.partial = finish()
            raise
        for raw, j, _post in costs:
            for head in column(geometry, j):
                last_costs[head] = raw
        raw_cost, victim_column, post = min(costs, key=lambda c: (c[0], c[1]))
        clamped_cost = max(0.0, raw_cost)
        if not clamped_cost < ledger.remaining:
            break
        heads = tuple(column(geometry, victim_column))
        live_columns.remove(victim_column)
        pruned_mask = canonicalize(pruned_mask + heads, geometry)
        pruned.extend(PrunedHead(h, iteration, raw_cost, clamped_cost) for h in heads)
        ledger.charge(clamped_cost)
        accuracy = post
        trace.append(TraceRow(
            iteration=iteration,
            pruned=heads,
            raw_cost=raw_cost,
            clamped_cost=clamped_cost,
            accuracy_after=accuracy,
            charged_total=ledger.charged,
            live_count=len(live_columns) * geometry.layers,
            evaluations=len(costs),
        ))
    return finish()


@dataclass(frozen=True)
class TrialResult:
    """One random-order trial: how far the permutation got before the drop
    from baseline exceeded the budget. `budget_used` is that final drop and
    may be negative when the pruned prefix improved accuracy."""

    seed: int
    pruned_count: int
    budget_used: float
    final_accuracy: float


@dataclass(frozen=True)
class DistributionSummary:
    trials: int
    pruned_count_histogram: tuple[tuple[int, int], ...]  # (pruned_count, trials)
    pruned_min: int
    pruned_median: float
    pruned_max: int
    pruned_p95: float
    budget_used_histogram: tuple[tuple[float, float, int], ...]  # (lo, hi, trials)


@dataclass(frozen=True)
class RandomExperiment:
    budget: float
    base_seed: int
    trials: tuple[TrialResult, ...]
    summary: DistributionSummary
    best_seed: int


def _permutation(geometry: Geometry, seed: int) -> list[HeadIndex]:
    heads = all_heads(geometry)
    order = np.random.default_rng(seed).permutation(len(heads))
    return [heads[i] for i in order]


def random_trial(geometry: Geometry, oracle: Oracle, budget: float, seed: int) -> TrialResult:
    solution = random_solution(geometry, oracle, budget, seed)
    return TrialResult(
        seed=seed,
        pruned_count=solution.pruned_count,
        budget_used=oracle.baseline_accuracy - solution.final_accuracy,
        final_accuracy=solution.final_accuracy,
    )


def random_solution(geometry: Geometry, oracle: Oracle, budget: float, seed: int) -> PruneSolution:
    """Run one random trial and keep the full per-step trace.

    Heads are pruned in seeded-permutation order; after each prune the mask
    is re-evaluated, and the trial ends right before the first head whose
    inclusion pushes (baseline - accuracy) above the budget.
    """
    given = UNBOUNDED if budget is None else float(budget)
    baseline = oracle.baseline_accuracy
    pruned_mask: Mask = EMPTY_MASK
    pruned: list[PrunedHead] = []
    last_costs: dict[HeadIndex, float] = {}
    trace: list[TraceRow] = []
    accuracy = baseline
    evaluations = 0
    requested0, computed0 = oracle.counter.requested, oracle.counter.computed
    total = geometry.total_heads

    for iteration, head in enumerate(_permutation(geometry, seed), start=1):
        candidate = canonicalize(pruned_mask + (head,), geometry)
        post = oracle.evaluate(candidate)
        evaluations += 1
        if baseline - post > given:
            break
        raw_cost = accuracy - post
        last_costs[head] = raw_cost
        pruned_mask = candidate
        pruned.append(PrunedHead(head, iteration, raw_cost, max(0.0, raw_cost)))
        accuracy = post
        trace.append(TraceRow(
            iteration=iteration,
            pruned=(head,),
            raw_cost=raw_cost,
            clamped_cost=max(0.0, raw_cost),
            accuracy_after=accuracy,
            charged_total=max(0.0, baseline - accuracy),
            live_count=total - iteration,
            evaluations=1,
        ))

    ledger = BudgetLedger(given, charged=max(0.0, baseline - accuracy))
    return PruneSolution(
        strategy="random",
        cost_mode=INCREMENTAL,
        geometry=geometry,
        baseline_accuracy=baseline,
        final_accuracy=accuracy,
        budget=ledger,
        pruned=tuple(pruned),
        eliminated=(),
        outcomes=build_outcomes(geometry, {p.head: p.raw_cost for p in pruned}, {}, last_costs),
        trace=tuple(trace),
        evals=EvalCounts(
            requested=oracle.counter.requested - requested0,
            computed=oracle.counter.computed - computed0,
            candidate_evaluations=evaluations,
        ),
    )


def summarize_trials(trials: list[TrialResult], budget_bins: int = 20) -> DistributionSummary:
    counts = [t.pruned_count for t in trials]
    hist: dict[int, int] = {}
    for c in counts:
        hist[c] = hist.get(c, 0) + 1
    used = [t.budget_used for t in trials]
    lo, hi = min(used), max(used)
    if lo == hi:
        budget_hist = ((lo, hi, len(trials)),)
    else:
        edges = np.linspace(lo, hi, budget_bins + 1)
        binned, _ = np.histogram(used, bins=edges)
        budget_hist = tuple(
            (float(edges[i]), float(edges[i + 1]), int(binned[i])) for i in range(budget_bins)
        )
    return DistributionSummary(
        trials=len(trials),
        pruned_count_histogram=tuple(sorted(hist.items())),
        pruned_min=int(min(counts)),
        pruned_median=float(np.median(counts)),
        pruned_max=int(max(counts)),
        pruned_p95=float(np.percentile(counts, 95)),
        budget_used_histogram=budget_hist,
    )


def random_experiment(
    geometry: Geometry,
    oracle: Oracle,
    budget: float,
    trials: int,
    base_seed: int,
    *,
    workers: int = 1,
) -> RandomExperiment:
    """Run `trials` seeded random trials (seeds base_seed .. base_seed+trials-1)
    against one shared oracle cache and aggregate the outcome distribution.
    Trials are independent; with workers > 1 they run on a thread pool and the
    aggregation stays seed-ordered, so results match a serial run."""
    if trials < 1:
        raise ValueError(f"trials must be at least 1, got {trials}")
    seeds = [base_seed + i for i in range(trials)]
    if workers > 1 and trials > 1:
        from concurrent.futures import ThreadPoolExecutor

        with ThreadPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(
                lambda seed: random_trial(geometry, oracle, budget, seed), seeds
            ))
    else:
        results = [random_trial(geometry, oracle, budget, seed) for seed in seeds]
    best = max(results, key=lambda t: (t.pruned_count, -t.seed))
    return RandomExperiment(
        budget=UNBOUNDED if budget is None else float(budget),
        base_seed=base_seed,
        trials=tuple(results),
        summary=summarize_trials(results),
        best_seed=best.seed,
    )
