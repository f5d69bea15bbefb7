"""End-to-end acceptance suite.

Each test is one release criterion at its stated tolerance; the conftest
hook prints a PASS/FAIL line per criterion after the run.
"""

import json
import time

import numpy as np
from click.testing import CliRunner

from headprune import (
    AdditiveOracle,
    Geometry,
    HeadIndex,
    SupermodularOracle,
    astar_prune,
    local_prune,
    global_prune,
    random_solution,
    random_experiment,
)
from headprune.cli import main as cli_main
from headprune.runner import zero_budget_summary

from conftest import FIXTURE_BASELINE, FIXTURE_WEIGHTS, random_weights

TOLERANCE = 1e-9


def test_hand_trace_reproduction():
    """2x2 additive fixture, budget 0.7: the full iteration-by-iteration trace."""
    started = time.monotonic()
    oracle = AdditiveOracle(FIXTURE_BASELINE, FIXTURE_WEIGHTS)
    solution = astar_prune(Geometry(2, 2), oracle, 0.7, "incremental")

    assert [p.head for p in solution.pruned] == [
        HeadIndex(0, 0), HeadIndex(0, 1), HeadIndex(1, 0)
    ]
    assert [(e.head, e.iteration) for e in solution.eliminated] == [(HeadIndex(1, 1), 1)]
    assert abs(solution.budget.charged - 0.6) < TOLERANCE
    assert abs(solution.final_accuracy - 89.9) < TOLERANCE

    expected_rows = [
        (1, HeadIndex(0, 0), -0.5, 0.0, 90.5, 0.0, 2, 4),
        (2, HeadIndex(0, 1), 0.2, 0.2, 90.3, 0.2, 1, 2),
        (3, HeadIndex(1, 0), 0.4, 0.4, 89.9, 0.6, 0, 1),
    ]
    assert len(solution.trace) == len(expected_rows)
    for row, (k, head, raw, clamped, acc, charged, live, evals) in zip(
        solution.trace, expected_rows
    ):
        assert row.iteration == k and row.pruned == (head,)
        assert abs(row.raw_cost - raw) < TOLERANCE
        assert abs(row.clamped_cost - clamped) < TOLERANCE
        assert abs(row.accuracy_after - acc) < TOLERANCE
        assert abs(row.charged_total - charged) < TOLERANCE
        assert row.live_count == live and row.evaluations == evals
    assert solution.evals.computed == 8
    assert time.monotonic() - started < 1.0


def test_local_pruning_evaluation_count():
    """Unbounded local pruning of a 12x12 grid costs exactly 10,440 evaluations."""
    started = time.monotonic()
    oracle = AdditiveOracle(92.46, random_weights(0, 12, 12))
    solution = local_prune(Geometry(12, 12), oracle, None)
    assert solution.evals.candidate_evaluations == 10_440
    assert solution.pruned_count == 144
    assert time.monotonic() - started < 5.0


def test_budget_guarantee_suite():
    """200+ randomized configs; every strategy's final accuracy stays within budget."""
    started = time.monotonic()
    rng = np.random.default_rng(20250810)
    baseline = 90.0
    configs = 0
    modes_seen = set()
    for _ in range(220):
        layers = int(rng.integers(1, 13))
        heads = int(rng.integers(1, 13))
        budget = float(rng.uniform(0.0, 5.0))
        mode = "incremental" if rng.random() < 0.5 else "baseline"
        seed = int(rng.integers(0, 2**31))
        if rng.random() < 0.5:
            def make_oracle():
                return AdditiveOracle(baseline, random_weights(seed, layers, heads))
        else:
            growth = float(rng.uniform(0.0, 0.2))

            def make_oracle():
                return SupermodularOracle(
                    baseline, random_weights(seed, layers, heads, negative_fraction=0.0),
                    growth=growth,
                )
        geometry = Geometry(layers, heads)
        runs = [
            astar_prune(geometry, make_oracle(), budget, mode),
            local_prune(geometry, make_oracle(), budget, mode),
            global_prune(geometry, make_oracle(), budget, mode),
            random_solution(geometry, make_oracle(), budget, seed=seed),
        ]
        for solution in runs:
            if solution.cost_mode == "incremental":
                final = make_oracle().evaluate(solution.pruned_mask)
                assert final >= baseline - budget - TOLERANCE, (
                    f"{solution.strategy} broke the budget: {final} < {baseline - budget}"
                )
        configs += 1
        modes_seen.add(mode)
    assert configs >= 200
    assert modes_seen == {"incremental", "baseline"}
    assert time.monotonic() - started < 60.0


def test_greedy_equivalence_and_search_advantage():
    """Guided search prunes the same set as exhaustive greedy with fewer evaluations."""
    started = time.monotonic()
    geometry = Geometry(12, 12)
    cases = 0
    strictly_fewer = 0
    for seed in range(51):
        budget = float(1 + seed % 3)  # budgets 1, 2, 3
        weights = random_weights(seed, 12, 12)
        guided = astar_prune(geometry, AdditiveOracle(92.46, weights), budget)
        greedy = local_prune(geometry, AdditiveOracle(92.46, weights), budget)
        assert guided.pruned_mask == greedy.pruned_mask, f"seed {seed} diverged"
        assert guided.evals.computed <= greedy.evals.computed, f"seed {seed} regressed"
        cases += 1
        if guided.evals.computed < greedy.evals.computed:
            strictly_fewer += 1
    assert cases >= 50
    assert strictly_fewer >= 0.9 * cases, f"only {strictly_fewer}/{cases} strictly fewer"
    assert time.monotonic() - started < 60.0


def _cost_history(oracle, budget):
    history = []
    astar_prune(
        oracle.geometry, oracle, budget,
        observer=lambda costs, victim, records, ledger: history.append(
            {head: entry.cost for head, entry in costs.entries.items()}
        ),
    )
    return history


def test_heuristic_admissibility():
    """Clamped cost at iteration k underestimates iteration k+1's cost: strictly
    on strictly supermodular oracles, exactly (to 1e-9) on additive ones."""
    strict_checked = 0
    for seed in range(10):
        growth = 0.02 + 0.018 * seed  # growth in (0, 0.2]
        oracle = SupermodularOracle(
            90.0, random_weights(seed, 12, 12, negative_fraction=0.0), growth=growth
        )
        history = _cost_history(oracle, 3.0)
        assert len(history) >= 2
        for previous, current in zip(history, history[1:]):
            for head in set(previous) & set(current):
                assert max(0.0, previous[head]) < current[head]
                strict_checked += 1
    assert strict_checked > 0

    exact_checked = 0
    for seed in range(10):
        oracle = AdditiveOracle(90.0, random_weights(seed, 12, 12))
        history = _cost_history(oracle, 3.0)
        for previous, current in zip(history, history[1:]):
            for head in set(previous) & set(current):
                assert abs(max(0.0, previous[head]) - max(0.0, current[head])) < TOLERANCE
                exact_checked += 1
    assert exact_checked > 0


def test_zero_budget_solution_shape():
    """Exactly 58 non-positive weights on a 12x12 grid: all 58 prune for free."""
    rng = np.random.default_rng(42)
    weights = rng.uniform(0.05, 1.5, size=(12, 12))
    flat = weights.reshape(-1)
    free = rng.choice(flat.size, size=58, replace=False)
    flat[free[:-1]] = -rng.uniform(0.01, 0.3, size=57)
    flat[free[-1]] = 0.0  # a head whose removal is exactly neutral
    assert int((flat <= 0).sum()) == 58

    oracle = AdditiveOracle(92.46, weights.tolist())
    solution = astar_prune(Geometry(12, 12), oracle, 1.0)
    summary = zero_budget_summary(solution)
    assert summary.heads_at_zero == 58
    assert summary.accuracy_at_zero >= 92.46
    assert abs(summary.compression_at_zero - 100.0 * 58 / 144) < TOLERANCE


def _heavy_tailed_weights(seed):
    """40% of heads free, most of the rest nearly free, a few ruinous."""
    rng = np.random.default_rng(seed)
    values = np.concatenate([
        -rng.uniform(0.0, 0.05, size=58),
        rng.uniform(0.01, 0.05, size=70),
        rng.uniform(2.0, 6.0, size=16),
    ])
    rng.shuffle(values)
    return values.reshape(12, 12).tolist()


def test_random_baseline_dominance():
    """Guided pruning beats the 95th percentile of 100 random trials almost always."""
    weights = _heavy_tailed_weights(7)
    budget = 3.0
    guided = astar_prune(Geometry(12, 12), AdditiveOracle(92.46, weights), budget)
    shared = AdditiveOracle(92.46, weights)
    wins = 0
    for experiment_seed in range(20):
        experiment = random_experiment(
            Geometry(12, 12), shared, budget, trials=100, base_seed=1000 * experiment_seed
        )
        if guided.pruned_count >= experiment.summary.pruned_p95:
            wins += 1
    assert wins >= 19, f"guided search beat the random p95 in only {wins}/20 experiments"


def test_replay_determinism(tmp_path):
    """record-table then replay reproduces the run report byte for byte."""
    config_path = tmp_path / "config.json"
    config_path.write_text(json.dumps({
        "strategy": "astar",
        "budget": 2.0,
        "oracle": {"additive": {"baseline": 92.46, "weights": random_weights(11, 12, 12)}},
    }))
    runner = CliRunner()
    original = tmp_path / "original"
    result = runner.invoke(cli_main, ["record-table", "--config", str(config_path),
                                      "--out", str(original)])
    assert result.exit_code == 0, result.output

    replayed = tmp_path / "replayed"
    result = runner.invoke(cli_main, ["replay",
                                      "--table", str(original / "oracle_table.json"),
                                      "--config", str(config_path),
                                      "--out", str(replayed)])
    assert result.exit_code == 0, result.output

    for name in ("run_report.json", "trace.csv", "mask_matrix.csv", "cost_matrix.csv"):
        assert (replayed / name).read_bytes() == (original / name).read_bytes(), name
    # Only the manifest (timestamps, hashes of differing oracle specs) may vary.
    assert json.loads((replayed / "run_meta.json").read_text())["evaluations"] == \
        json.loads((original / "run_meta.json").read_text())["evaluations"]
