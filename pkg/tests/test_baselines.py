import pytest
from hypothesis import given, settings, strategies as st

from headprune import (
    AdditiveOracle,
    Geometry,
    HeadIndex,
    astar_prune,
    global_prune,
    local_prune,
    random_experiment,
    random_solution,
    random_trial,
)
from headprune.baselines import _permutation, summarize_trials

from conftest import FIXTURE_BASELINE, FIXTURE_WEIGHTS, random_weights


def fresh_fixture():
    return AdditiveOracle(FIXTURE_BASELINE, FIXTURE_WEIGHTS)


# --- local pruning ---------------------------------------------------------

def test_local_fixture_run_matches_hand_walk():
    oracle = fresh_fixture()
    solution = local_prune(Geometry(2, 2), oracle, 0.7)
    assert [p.head for p in solution.pruned] == [
        HeadIndex(0, 0), HeadIndex(0, 1), HeadIndex(1, 0)
    ]
    # Rounds evaluate 4, 3, 2 candidates; the last round costs the lone
    # survivor (cost 1.0 > remaining 0.1) and stops: 10 in total.
    assert solution.evals.candidate_evaluations == 10


def test_local_single_head_grid():
    oracle = AdditiveOracle(90.0, [[0.3]])
    solution = local_prune(Geometry(1, 1), oracle, None)
    assert solution.evals.candidate_evaluations == 1
    assert solution.pruned_count == 1


@given(layers=st.integers(1, 4), heads=st.integers(1, 4), seed=st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_local_unbounded_evaluation_count(layers, heads, seed):
    m = layers * heads
    oracle = AdditiveOracle(90.0, random_weights(seed, layers, heads))
    solution = local_prune(Geometry(layers, heads), oracle, None)
    assert solution.evals.candidate_evaluations == m * (m + 1) // 2
    assert solution.pruned_count == m


# --- global pruning --------------------------------------------------------

def test_global_fixture_run():
    oracle = fresh_fixture()
    solution = global_prune(Geometry(2, 2), oracle, 0.7)
    # Column 0 costs -0.5 + 0.4 = -0.1 -> clamps to 0 and is pruned whole;
    # column 1 then costs 1.2 > 0.7 and the run stops after 3 evaluations.
    assert solution.pruned_mask == (HeadIndex(0, 0), HeadIndex(1, 0))
    assert solution.budget.charged == 0.0
    assert solution.evals.candidate_evaluations == 3
    assert len(solution.trace) == 1
    assert solution.trace[0].pruned == (HeadIndex(0, 0), HeadIndex(1, 0))
    assert solution.trace[0].raw_cost == pytest.approx(-0.1, abs=1e-9)


def test_global_budget_zero():
    solution = global_prune(Geometry(2, 2), fresh_fixture(), 0.0)
    assert solution.pruned == ()
    assert solution.evals.requested == 0


@given(layers=st.integers(1, 6), heads=st.integers(1, 6), seed=st.integers(0, 1000))
@settings(max_examples=25, deadline=None)
def test_global_unbounded_evaluation_count(layers, heads, seed):
    oracle = AdditiveOracle(90.0, random_weights(seed, layers, heads))
    solution = global_prune(Geometry(layers, heads), oracle, None)
    assert solution.evals.candidate_evaluations == heads * (heads + 1) // 2
    assert solution.pruned_count == layers * heads


def test_global_charges_column_as_one_move():
    oracle = AdditiveOracle(90.0, [[0.1, 0.5], [0.2, 0.5]])
    solution = global_prune(Geometry(2, 2), oracle, 2.5)
    # Column 0 drop 0.3, then column 1 drop 1.0: two ledger charges.
    assert [row.clamped_cost for row in solution.trace] == pytest.approx([0.3, 1.0], abs=1e-9)
    assert solution.budget.charged == pytest.approx(1.3, abs=1e-9)


# --- random pruning --------------------------------------------------------

def test_random_trial_prunes_all_when_budget_allows():
    oracle = AdditiveOracle(90.0, [[0.1, 0.1], [0.1, 0.1]])
    trial = random_trial(Geometry(2, 2), oracle, 10.0, seed=1)
    assert trial.pruned_count == 4
    assert trial.budget_used == pytest.approx(0.4, abs=1e-9)


def test_random_trial_budget_zero_all_positive():
    oracle = AdditiveOracle(90.0, [[0.1, 0.1], [0.1, 0.1]])
    trial = random_trial(Geometry(2, 2), oracle, 0.0, seed=1)
    assert trial.pruned_count == 0
    assert trial.final_accuracy == 90.0


def test_random_trial_stops_before_first_violation():
    geometry = Geometry(2, 2)
    for seed in range(12):
        trial = random_trial(geometry, fresh_fixture(), 0.7, seed)
        # Independent walk of the documented stop rule over the same
        # permutation: prune while (baseline - accuracy) stays <= budget,
        # accuracy taken from a fresh oracle.
        check = fresh_fixture()
        expected = 0
        prefix = []
        for head in _permutation(geometry, seed):
            prefix.append(head)
            if 90.0 - check.evaluate(tuple(sorted(prefix))) > 0.7:
                break
            expected += 1
        assert trial.pruned_count == expected


def test_random_trial_deterministic():
    geometry = Geometry(3, 3)
    weights = random_weights(8, 3, 3)
    first = random_trial(geometry, AdditiveOracle(90.0, weights), 1.0, seed=5)
    second = random_trial(geometry, AdditiveOracle(90.0, weights), 1.0, seed=5)
    assert first == second


def test_random_solution_trace_shape():
    oracle = AdditiveOracle(90.0, [[0.1, 0.1], [0.1, 0.1]])
    solution = random_solution(Geometry(2, 2), oracle, 10.0, seed=3)
    assert solution.strategy == "random"
    assert [row.live_count for row in solution.trace] == [3, 2, 1, 0]
    assert solution.trace[-1].accuracy_after == solution.final_accuracy


def test_random_experiment_aggregates_all_trials():
    oracle = AdditiveOracle(90.0, random_weights(2, 4, 4))
    experiment = random_experiment(Geometry(4, 4), oracle, 1.0, trials=100, base_seed=10)
    assert len(experiment.trials) == 100
    assert [t.seed for t in experiment.trials] == list(range(10, 110))
    assert sum(n for _, n in experiment.summary.pruned_count_histogram) == 100
    counts = [t.pruned_count for t in experiment.trials]
    assert experiment.summary.pruned_min == min(counts)
    assert experiment.summary.pruned_max == max(counts)
    best = max(counts)
    assert any(t.seed == experiment.best_seed and t.pruned_count == best
               for t in experiment.trials)


def test_random_experiment_parallel_matches_serial():
    weights = random_weights(6, 4, 4)
    serial = random_experiment(Geometry(4, 4), AdditiveOracle(90.0, weights), 1.5,
                               trials=40, base_seed=3)
    parallel = random_experiment(Geometry(4, 4), AdditiveOracle(90.0, weights), 1.5,
                                 trials=40, base_seed=3, workers=4)
    assert serial == parallel


def test_random_experiment_single_trial_degenerates():
    oracle = AdditiveOracle(90.0, [[0.2, 0.2]])
    experiment = random_experiment(Geometry(1, 2), oracle, 1.0, trials=1, base_seed=0)
    trial = experiment.trials[0]
    summary = experiment.summary
    assert summary.trials == 1
    assert summary.pruned_min == summary.pruned_max == trial.pruned_count
    assert summary.pruned_median == trial.pruned_count
    assert summary.budget_used_histogram[0][2] == 1


def test_summarize_trials_histogram_mass():
    from headprune import TrialResult

    trials = [TrialResult(seed=i, pruned_count=i % 3, budget_used=0.1 * i, final_accuracy=90 - 0.1 * i)
              for i in range(30)]
    summary = summarize_trials(trials)
    assert sum(n for _, n in summary.pruned_count_histogram) == 30
    assert sum(n for _, _, n in summary.budget_used_histogram) == 30


# --- cross-strategy guarantees ---------------------------------------------

@given(
    layers=st.integers(1, 4),
    heads=st.integers(1, 4),
    seed=st.integers(0, 500),
    budget=st.floats(0.0, 3.0),
)
@settings(max_examples=30, deadline=None)
def test_every_strategy_honors_budget(layers, heads, seed, budget):
    geometry = Geometry(layers, heads)
    weights = random_weights(seed, layers, heads)

    def oracle():
        return AdditiveOracle(90.0, weights)

    runs = [
        astar_prune(geometry, oracle(), budget),
        local_prune(geometry, oracle(), budget),
        global_prune(geometry, oracle(), budget),
        random_solution(geometry, oracle(), budget, seed=seed),
    ]
    for solution in runs:
        check = oracle()
        assert check.evaluate(solution.pruned_mask) >= 90.0 - budget - 1e-9
