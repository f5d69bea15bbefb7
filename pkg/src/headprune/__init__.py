"""Budget-constrained attention-head pruning.

Search strategies (guided best-first, greedy local, column-wise global,
random order) select heads to prune from a layered transformer against a
pluggable accuracy oracle, guaranteeing the final accuracy never drops more
than the given budget below baseline.
"""

__version__ = "0.1.0"

from .astar import astar_prune, compute_costs, eliminate_candidates, select_victim
from .baselines import (
    DistributionSummary,
    RandomExperiment,
    TrialResult,
    global_prune,
    local_prune,
    random_experiment,
    random_solution,
    random_trial,
)
from .errors import (
    BoundsError,
    ConfigError,
    HeadPruneError,
    InternalInvariantError,
    OracleError,
    ProtocolError,
    TableMissError,
)
from .heads import Geometry, HeadIndex, all_heads, canonicalize, column
from .oracles import (
    AdditiveOracle,
    EvalCounter,
    Oracle,
    OracleInfo,
    SupermodularOracle,
    TableOracle,
    load_table,
    save_table,
)
from .solution import BudgetLedger, PruneSolution, TraceRow

__all__ = [
    "__version__",
    "AdditiveOracle",
    "BoundsError",
    "BudgetLedger",
    "ConfigError",
    "DistributionSummary",
    "EvalCounter",
    "Geometry",
    "HeadIndex",
    "HeadPruneError",
    "InternalInvariantError",
    "Oracle",
    "OracleError",
    "OracleInfo",
    "ProtocolError",
    "PruneSolution",
    "RandomExperiment",
    "SupermodularOracle",
    "TableMissError",
    "TableOracle",
    "TraceRow",
    "TrialResult",
    "all_heads",
    "astar_prune",
    "canonicalize",
    "column",
    "compute_costs",
    "eliminate_candidates",
    "global_prune",
    "load_table",
    "local_prune",
    "random_experiment",
    "random_solution",
    "random_trial",
    "save_table",
    "select_victim",
]
