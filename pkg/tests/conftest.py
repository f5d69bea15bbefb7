import numpy as np
import pytest

from headprune import AdditiveOracle, Geometry

_ACCEPTANCE_RESULTS: dict[str, str] = {}


def pytest_runtest_logreport(report):
    if report.when == "call" and "test_acceptance" in report.nodeid:
        _ACCEPTANCE_RESULTS[report.nodeid.split("::")[-1]] = report.outcome


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if not _ACCEPTANCE_RESULTS:
        return
    terminalreporter.write_sep("-", "acceptance criteria")
    for name, outcome in _ACCEPTANCE_RESULTS.items():
        status = "PASS" if outcome == "passed" else "FAIL"
        terminalreporter.write_line(f"{status}  {name}")

# The 2x2 fixture used throughout: one helpful head, three harmful ones.
FIXTURE_WEIGHTS = [[-0.5, 0.2], [0.4, 1.0]]
FIXTURE_BASELINE = 90.0


@pytest.fixture
def fixture_oracle():
    return AdditiveOracle(FIXTURE_BASELINE, FIXTURE_WEIGHTS)


@pytest.fixture
def fixture_geometry():
    return Geometry(2, 2)


def random_weights(seed: int, layers: int, heads: int, negative_fraction: float = 0.4):
    """Mixed-sign weight grid: a chosen fraction of heads is free to prune."""
    rng = np.random.default_rng(seed)
    weights = np.abs(rng.normal(0.0, 0.6, size=(layers, heads)))
    flat = weights.reshape(-1)
    negatives = rng.choice(flat.size, size=int(round(negative_fraction * flat.size)), replace=False)
    flat[negatives] *= -0.1
    return weights.tolist()
