"""Experiment orchestration: build the oracle, run the strategy, write artifacts.

Every successful run leaves a directory with a byte-reproducible report and
CSV exports; the only file that may differ between identical reruns is the
manifest (run_meta.json), which carries the timestamps and the config and
oracle-spec hashes.
"""

from __future__ import annotations

import csv
import io
import json
import time
from dataclasses import dataclass
from datetime import datetime, timezone
from pathlib import Path

from . import __version__
from .astar import astar_prune
from .baselines import RandomExperiment, global_prune, local_prune, random_experiment, random_solution
from .config import RunConfig, build_oracle, config_hash, load_config, oracle_spec_hash
from .errors import ConfigError, OracleError
from .oracles import Oracle, save_table
from .reportio import (
    REPORT_FORMAT,
    cost_matrix_csv,
    distribution_csv,
    dumps_json,
    experiment_to_dict,
    histogram_csv,
    mask_matrix_csv,
    solution_from_dict,
    solution_to_dict,
    trace_csv,
)
from .solution import EvalCounts, PruneSolution

REPORT_FILE = "run_report.json"
TRACE_FILE = "trace.csv"
MASK_FILE = "mask_matrix.csv"
COST_FILE = "cost_matrix.csv"
DISTRIBUTION_FILE = "distribution.csv"
HISTOGRAM_FILE = "histogram.csv"
TABLE_FILE = "oracle_table.json"
META_FILE = "run_meta.json"

# Files compared when checking run reproducibility; the manifest is excluded
# because it holds timestamps.
DETERMINISTIC_FILES = (REPORT_FILE, TRACE_FILE, MASK_FILE, COST_FILE,
                       DISTRIBUTION_FILE, HISTOGRAM_FILE, TABLE_FILE)


@dataclass(frozen=True)
class RunArtifacts:
    out_dir: Path
    report: Path
    trace: Path
    mask_matrix: Path
    cost_matrix: Path
    meta: Path
    distribution: Path | None = None
    histogram: Path | None = None
    table: Path | None = None


@dataclass(frozen=True)
class ZeroBudgetSummary:
    heads_at_zero: int
    accuracy_at_zero: float
    compression_at_zero: float


def zero_budget_summary(solution: PruneSolution) -> ZeroBudgetSummary:
    """How far the run got before spending any budget: the longest pruned
    prefix with zero cumulative charge, the accuracy at its end, and the
    compression it represents."""
    heads = 0
    accuracy = solution.baseline_accuracy
    for row in solution.trace:
        if row.charged_total != 0.0:
            break
        heads += len(row.pruned)
        accuracy = row.accuracy_after
    return ZeroBudgetSummary(
        heads_at_zero=heads,
        accuracy_at_zero=accuracy,
        compression_at_zero=100.0 * heads / solution.geometry.total_heads,
    )


def params_per_head(hidden_size: int, heads: int) -> int:
    """Prunable parameters of one attention head: query/key/value/output
    weight slices plus query/key/value bias slices."""
    if hidden_size % heads != 0:
        raise ConfigError(
            f"hidden_size {hidden_size} is not divisible by heads {heads}"
        )
    head_dim = hidden_size // heads
    return 4 * hidden_size * head_dim + 3 * head_dim


def param_reduction(model_dims, pruned_count: int) -> int:
    """Remaining parameter count after removing `pruned_count` heads."""
    return model_dims.total_parameters - pruned_count * params_per_head(
        model_dims.hidden_size, model_dims.heads
    )


def run_strategy(config: RunConfig, oracle: Oracle) -> tuple[PruneSolution, RandomExperiment | None]:
    geometry = oracle.geometry
    if config.strategy == "astar":
        return astar_prune(geometry, oracle, config.budget, config.cost_mode,
                           workers=config.workers), None
    if config.strategy == "local":
        return local_prune(geometry, oracle, config.budget, config.cost_mode,
                           workers=config.workers), None
    if config.strategy == "global":
        return global_prune(geometry, oracle, config.budget, config.cost_mode), None
    requested0, computed0 = oracle.counter.requested, oracle.counter.computed
    experiment = random_experiment(geometry, oracle, config.budget, config.trials, config.seed,
                                   workers=config.workers)
    # Artifacts describe the most successful trial; the full distribution is
    # exported alongside. Rebuilding it hits only cached masks.
    best = random_solution(geometry, oracle, config.budget, experiment.best_seed)
    total = geometry.total_heads
    best.evals = EvalCounts(
        requested=oracle.counter.requested - requested0,
        computed=oracle.counter.computed - computed0,
        # One evaluation per pruned head plus the rejected one, per trial.
        candidate_evaluations=sum(
            t.pruned_count + (1 if t.pruned_count < total else 0) for t in experiment.trials
        ),
    )
    return best, experiment


def build_report(config: RunConfig, solution: PruneSolution,
                 experiment: RandomExperiment | None) -> dict:
    report = {"format": REPORT_FORMAT}
    report.update(solution_to_dict(solution))
    if config.strategy == "random":
        report["strategy_params"] = {"seed": config.seed, "trials": config.trials}
    if experiment is not None:
        report["random"] = experiment_to_dict(experiment)
    if config.model_dims is not None:
        dims = config.model_dims
        per_head = params_per_head(dims.hidden_size, dims.heads)
        report["parameters"] = {
            "total": dims.total_parameters,
            "per_head": per_head,
            "remaining": param_reduction(dims, solution.pruned_count),
        }
    return report


def parse_report(document: dict | str) -> tuple[PruneSolution, dict]:
    """Re-parse a run report into the solution plus the auxiliary sections."""
    if isinstance(document, str):
        document = json.loads(document)
    if document.get("format") != REPORT_FORMAT:
        raise ConfigError(f"not a {REPORT_FORMAT} document")
    return solution_from_dict(document), document


def run(config: RunConfig, out_dir, *, record_table: bool = False) -> RunArtifacts:
    """Execute one configured run and write its artifact files into out_dir.

    With record_table=True every computed (mask, accuracy) pair is dumped as
    a table-oracle file, which can replay this run without the original
    oracle. Oracle failures still write the partial trace before re-raising.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    started = time.monotonic()
    oracle = build_oracle(config)
    try:
        try:
            solution, experiment = run_strategy(config, oracle)
        except OracleError as exc:
            if exc.partial is not None:
                failure = {"format": REPORT_FORMAT, "status": "failed", "error": str(exc)}
                failure.update(solution_to_dict(exc.partial))
                (out / "run_report.partial.json").write_text(dumps_json(failure))
            raise
        report = build_report(config, solution, experiment)
        artifacts = _write_artifacts(config, solution, experiment, report, oracle, out,
                                     record_table=record_table,
                                     duration=time.monotonic() - started)
        return artifacts
    finally:
        oracle.close()


def export_figure_data(solution: PruneSolution, out_dir) -> dict[str, Path]:
    """Write the plot-ready CSVs for one solution: the pruned/kept mask
    matrix, the sorted per-head cost matrix with outcome labels, and the
    per-iteration trace (accuracy, cumulative budget, live count)."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = {
        TRACE_FILE: (out / TRACE_FILE, trace_csv(solution)),
        MASK_FILE: (out / MASK_FILE, mask_matrix_csv(solution)),
        COST_FILE: (out / COST_FILE, cost_matrix_csv(solution)),
    }
    for path, content in paths.values():
        path.write_text(content)
    return {name: path for name, (path, _) in paths.items()}


def _write_artifacts(config: RunConfig, solution: PruneSolution,
                     experiment: RandomExperiment | None, report: dict,
                     oracle: Oracle, out: Path, *, record_table: bool,
                     duration: float) -> RunArtifacts:
    report_path = out / REPORT_FILE
    report_path.write_text(dumps_json(report))
    figures = export_figure_data(solution, out)
    trace_path = figures[TRACE_FILE]
    mask_path = figures[MASK_FILE]
    cost_path = figures[COST_FILE]

    distribution_path = histogram_path = None
    if experiment is not None:
        distribution_path = out / DISTRIBUTION_FILE
        distribution_path.write_text(distribution_csv(experiment))
        histogram_path = out / HISTOGRAM_FILE
        histogram_path.write_text(histogram_csv(experiment.summary))

    table_path = None
    if record_table:
        table_path = out / TABLE_FILE
        save_table(table_path, oracle.geometry, oracle.baseline_accuracy, oracle.recorded())

    meta_path = out / META_FILE
    meta = {
        "created_at": datetime.now(timezone.utc).isoformat(),
        "duration_seconds": duration,
        "package_version": __version__,
        "config_hash": config_hash(config),
        "oracle_spec_hash": oracle_spec_hash(config),
        "config": config.model_dump(),
        "evaluations": report["evaluations"],
        "files": [p.name for p in (report_path, trace_path, mask_path, cost_path,
                                   distribution_path, histogram_path, table_path) if p],
    }
    meta_path.write_text(dumps_json(meta))
    return RunArtifacts(
        out_dir=out,
        report=report_path,
        trace=trace_path,
        mask_matrix=mask_path,
        cost_matrix=cost_path,
        meta=meta_path,
        distribution=distribution_path,
        histogram=histogram_path,
        table=table_path,
    )


def replay_config(config: RunConfig, table_path: str) -> RunConfig:
    """Same run, but against a recorded table oracle."""
    document = config.model_dump()
    document["oracle"] = {"table": {"path": str(table_path)}}
    document["geometry"] = None
    return RunConfig.model_validate(document)


SUMMARY_COLUMNS = [
    "run", "strategy", "budget_given", "budget_used", "budget_remaining",
    "zero_budget_heads", "zero_budget_compression_pct", "zero_budget_accuracy",
    "pruned_heads", "compression_pct", "final_accuracy",
    "searches_computed", "searches_requested", "candidate_evaluations",
]


def summarize_reports(reports: list[tuple[str, dict | str]]) -> str:
    """Budget-accounting summary across runs, one CSV row per report."""
    buffer = io.StringIO()
    writer = csv.writer(buffer, lineterminator="\n")
    writer.writerow(SUMMARY_COLUMNS)
    for label, document in sorted(reports, key=lambda pair: pair[0]):
        solution, _ = parse_report(document)
        zero = zero_budget_summary(solution)
        total = solution.geometry.total_heads
        given = solution.budget.given
        remaining = solution.budget.remaining
        writer.writerow([
            label,
            solution.strategy,
            "unbounded" if given == float("inf") else given,
            solution.budget.charged,
            "unbounded" if remaining == float("inf") else remaining,
            zero.heads_at_zero,
            zero.compression_at_zero,
            zero.accuracy_at_zero,
            solution.pruned_count,
            100.0 * solution.pruned_count / total,
            solution.final_accuracy,
            solution.evals.computed,
            solution.evals.requested,
            solution.evals.candidate_evaluations,
        ])
    return buffer.getvalue()


def load_config_file(path) -> RunConfig:
    try:
        text = Path(path).read_text(encoding="utf-8")
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from exc
    return load_config(text)
