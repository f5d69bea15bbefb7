"""Lossless report serialization and plot-ready CSV exports.

The run report deliberately excludes the oracle spec (hashes of it live in
the run manifest instead), so replaying a run through a recorded table
oracle reproduces the report byte for byte.
"""

from __future__ import annotations

import csv
import io
import json

from .baselines import DistributionSummary, RandomExperiment, TrialResult
from .heads import Geometry, HeadIndex, mask_to_pairs
from .solution import (
    BudgetLedger,
    EliminatedHead,
    EvalCounts,
    HeadOutcome,
    KEPT,
    PRUNED,
    PruneSolution,
    PrunedHead,
    TraceRow,
    UNBOUNDED,
)

REPORT_FORMAT = "headprune-report/1"


def _budget_value(value: float):
    return None if value == UNBOUNDED else value


def _budget_from(value) -> float:
    return UNBOUNDED if value is None else float(value)


def solution_to_dict(solution: PruneSolution) -> dict:
    return {
        "strategy": solution.strategy,
        "cost_mode": solution.cost_mode,
        "geometry": {
            "layers": solution.geometry.layers,
            "heads_per_layer": solution.geometry.heads_per_layer,
        },
        "baseline_accuracy": solution.baseline_accuracy,
        "final_accuracy": solution.final_accuracy,
        "budget": {
            "given": _budget_value(solution.budget.given),
            "charged": solution.budget.charged,
            "remaining": _budget_value(solution.budget.remaining),
        },
        "pruned": [
            {
                "head": [p.head.layer, p.head.head],
                "iteration": p.iteration,
                "raw_cost": p.raw_cost,
                "clamped_cost": p.clamped_cost,
            }
            for p in solution.pruned
        ],
        "eliminated": [
            {"head": [e.head.layer, e.head.head], "iteration": e.iteration}
            for e in solution.eliminated
        ],
        "head_outcomes": [
            {"head": [o.head.layer, o.head.head], "label": o.label, "last_cost": o.last_cost}
            for o in solution.outcomes
        ],
        "trace": [
            {
                "iteration": row.iteration,
                "pruned": mask_to_pairs(row.pruned),
                "raw_cost": row.raw_cost,
                "clamped_cost": row.clamped_cost,
                "accuracy_after": row.accuracy_after,
                "charged_total": row.charged_total,
                "live_count": row.live_count,
                "evaluations": row.evaluations,
            }
            for row in solution.trace
        ],
        "evaluations": {
            "requested": solution.evals.requested,
            "computed": solution.evals.computed,
            "candidate_evaluations": solution.evals.candidate_evaluations,
        },
    }


def solution_from_dict(doc: dict) -> PruneSolution:
    geometry = Geometry(doc["geometry"]["layers"], doc["geometry"]["heads_per_layer"])
    budget = BudgetLedger(
        given=_budget_from(doc["budget"]["given"]),
        charged=float(doc["budget"]["charged"]),
    )
    pruned = tuple(
        PrunedHead(HeadIndex(*p["head"]), p["iteration"], p["raw_cost"], p["clamped_cost"])
        for p in doc["pruned"]
    )
    eliminated = tuple(
        EliminatedHead(HeadIndex(*e["head"]), e["iteration"]) for e in doc["eliminated"]
    )
    outcomes = tuple(
        HeadOutcome(HeadIndex(*o["head"]), o["label"], o["last_cost"])
        for o in doc["head_outcomes"]
    )
    trace = tuple(
        TraceRow(
            iteration=row["iteration"],
            pruned=tuple(HeadIndex(*h) for h in row["pruned"]),
            raw_cost=row["raw_cost"],
            clamped_cost=row["clamped_cost"],
            accuracy_after=row["accuracy_after"],
            charged_total=row["charged_total"],
            live_count=row["live_count"],
            evaluations=row["evaluations"],
        )
        for row in doc["trace"]
    )
    evals = EvalCounts(
        requested=doc["evaluations"]["requested"],
        computed=doc["evaluations"]["computed"],
        candidate_evaluations=doc["evaluations"]["candidate_evaluations"],
    )
    return PruneSolution(
        strategy=doc["strategy"],
        cost_mode=doc["cost_mode"],
        geometry=geometry,
        baseline_accuracy=doc["baseline_accuracy"],
        final_accuracy=doc["final_accuracy"],
        budget=budget,
        pruned=pruned,
        eliminated=eliminated,
        outcomes=outcomes,
        trace=trace,
        evals=evals,
    )


def experiment_to_dict(experiment: RandomExperiment) -> dict:
    summary = experiment.summary
    return {
        "budget": _budget_value(experiment.budget),
        "base_seed": experiment.base_seed,
        "best_seed": experiment.best_seed,
        "trials": [
            {
                "seed": t.seed,
                "pruned_count": t.pruned_count,
                "budget_used": t.budget_used,
                "final_accuracy": t.final_accuracy,
            }
            for t in experiment.trials
        ],
        "summary": {
            "trials": summary.trials,
            "pruned_count_histogram": [list(pair) for pair in summary.pruned_count_histogram],
            "pruned_min": summary.pruned_min,
            "pruned_median": summary.pruned_median,
            "pruned_max": summary.pruned_max,
            "pruned_p95": summary.pruned_p95,
            "budget_used_histogram": [list(bin_) for bin_ in summary.budget_used_histogram],
        },
    }


def experiment_from_dict(doc: dict) -> RandomExperiment:
    summary = doc["summary"]
    return RandomExperiment(
        budget=_budget_from(doc["budget"]),
        base_seed=doc["base_seed"],
        best_seed=doc["best_seed"],
        trials=tuple(
            TrialResult(t["seed"], t["pruned_count"], t["budget_used"], t["final_accuracy"])
            for t in doc["trials"]
        ),
        summary=DistributionSummary(
            trials=summary["trials"],
            pruned_count_histogram=tuple(
                (int(c), int(n)) for c, n in summary["pruned_count_histogram"]
            ),
            pruned_min=summary["pruned_min"],
            pruned_median=summary["pruned_median"],
            pruned_max=summary["pruned_max"],
            pruned_p95=summary["pruned_p95"],
            budget_used_histogram=tuple(
                (float(lo), float(hi), int(n)) for lo, hi, n in summary["budget_used_histogram"]
            ),
        ),
    )


def dumps_json(document: dict) -> str:
    return json.dumps(document, indent=2) + "\n"


def _csv_buffer():
    buffer = io.StringIO()
    return buffer, csv.writer(buffer, lineterminator="\n")


def trace_csv(solution: PruneSolution) -> str:
    buffer, writer = _csv_buffer()
    writer.writerow(["iteration", "accuracy", "cumulative_budget", "live_count"])
    for row in solution.trace:
        writer.writerow([row.iteration, row.accuracy_after, row.charged_total, row.live_count])
    return buffer.getvalue()


def mask_matrix_csv(solution: PruneSolution) -> str:
    geometry = solution.geometry
    pruned = set(solution.pruned_mask)
    buffer, writer = _csv_buffer()
    writer.writerow(["layer"] + [f"h{j}" for j in range(geometry.heads_per_layer)])
    for layer in range(geometry.layers):
        writer.writerow([layer] + [
            PRUNED if HeadIndex(layer, j) in pruned else KEPT
            for j in range(geometry.heads_per_layer)
        ])
    return buffer.getvalue()


def cost_matrix_csv(solution: PruneSolution) -> str:
    """Heads sorted by their final observed cost (unobserved heads last),
    labelled pruned / eliminated / kept."""
    buffer, writer = _csv_buffer()
    writer.writerow(["layer", "head", "cost", "label"])
    observed = [o for o in solution.outcomes if o.last_cost is not None]
    unobserved = [o for o in solution.outcomes if o.last_cost is None]
    for outcome in sorted(observed, key=lambda o: (o.last_cost, o.head)) + unobserved:
        cost = "" if outcome.last_cost is None else outcome.last_cost
        writer.writerow([outcome.head.layer, outcome.head.head, cost, outcome.label])
    return buffer.getvalue()


def distribution_csv(experiment: RandomExperiment) -> str:
    buffer, writer = _csv_buffer()
    writer.writerow(["seed", "pruned_count", "budget_used", "final_accuracy"])
    for t in experiment.trials:
        writer.writerow([t.seed, t.pruned_count, t.budget_used, t.final_accuracy])
    return buffer.getvalue()


def histogram_csv(summary: DistributionSummary) -> str:
    buffer, writer = _csv_buffer()
    writer.writerow(["pruned_count", "trials"])
    for count, n in summary.pruned_count_histogram:
        writer.writerow([count, n])
    return buffer.getvalue()
