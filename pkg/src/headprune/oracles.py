"""Accuracy oracles: evaluate(mask) -> accuracy percent, with memoization.

Every oracle answers the empty mask with its baseline accuracy and is a
deterministic function of the canonical mask, so runs are replayable and
caching can never change a result. Two counters are kept: `requested`
(every evaluate call) and `computed` (distinct masks actually evaluated);
the latter is the "searches" figure reported by the harness.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass

import numpy as np

from .errors import ConfigError, TableMissError
from .heads import EMPTY_MASK, Geometry, HeadIndex, Mask, canonicalize, mask_from_pairs, mask_to_pairs


@dataclass
class EvalCounter:
    requested: int = 0
    computed: int = 0


@dataclass(frozen=True)
class OracleInfo:
    geometry: Geometry
    baseline_accuracy: float


def _check_percent(value: float, what: str) -> float:
    value = float(value)
    if not 0.0 <= value <= 100.0:
        raise ConfigError(f"{what} must be a percent in [0, 100], got {value}")
    return value


class Oracle:
    """Base class. Subclasses implement `_evaluate` on canonical masks.

    `evaluate` is safe to call from multiple threads; the cache and the
    counters are guarded by one lock, so identical masks are computed once.
    """

    def __init__(self, geometry: Geometry, baseline_accuracy: float):
        self._geometry = geometry
        self._baseline = _check_percent(baseline_accuracy, "baseline accuracy")
        self._cache: dict[Mask, float] = {}
        self._lock = threading.Lock()
        self.counter = EvalCounter()

    @property
    def geometry(self) -> Geometry:
        return self._geometry

    @property
    def baseline_accuracy(self) -> float:
        return self._baseline

    def info(self) -> OracleInfo:
        return OracleInfo(self._geometry, self._baseline)

    def evaluate(self, mask) -> float:
        mask = canonicalize(mask, self._geometry)
        with self._lock:
            self.counter.requested += 1
            try:
                return self._cache[mask]
            except KeyError:
                pass
            value = float(self._evaluate(mask))
            self._cache[mask] = value
            self.counter.computed += 1
            return value

    def recorded(self) -> dict[Mask, float]:
        """Snapshot of every computed (mask, accuracy) pair."""
        with self._lock:
            return dict(self._cache)

    def close(self):
        pass

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def _evaluate(self, mask: Mask) -> float:
        raise NotImplementedError


def _weights_table(weights, geometry_hint: Geometry | None = None) -> tuple[Geometry, dict[HeadIndex, float]]:
    rows = [list(map(float, row)) for row in weights]
    if not rows or any(len(row) != len(rows[0]) for row in rows) or not rows[0]:
        raise ConfigError("weights must be a non-empty rectangular layers x heads matrix")
    geometry = Geometry(len(rows), len(rows[0]))
    if geometry_hint is not None and geometry_hint != geometry:
        raise ConfigError(
            f"weights shape {geometry.layers}x{geometry.heads_per_layer} does not match "
            f"geometry {geometry_hint.layers}x{geometry_hint.heads_per_layer}"
        )
    table = {
        HeadIndex(i, j): rows[i][j]
        for i in range(geometry.layers)
        for j in range(geometry.heads_per_layer)
    }
    return geometry, table


def _noise_seed(seed: int, mask: Mask) -> int:
    # Keyed by (seed, canonical mask) so noise is replayable and order-free.
    digest = hashlib.blake2b(digest_size=8)
    digest.update(int(seed).to_bytes(8, "little", signed=True))
    for head in mask:
        digest.update(head.layer.to_bytes(4, "little"))
        digest.update(head.head.to_bytes(4, "little"))
    return int.from_bytes(digest.digest(), "little")


class AdditiveOracle(Oracle):
    """accuracy(S) = baseline - sum of per-head drops - optional per-mask noise.

    Weights may be negative: pruning such a head improves accuracy. With
    noise_sigma = 0 the oracle is exactly additive.
    """

    def __init__(self, baseline: float, weights, noise_sigma: float = 0.0, seed: int = 0,
                 geometry: Geometry | None = None):
        geometry, self._weights = _weights_table(weights, geometry)
        super().__init__(geometry, baseline)
        if noise_sigma < 0:
            raise ConfigError(f"noise_sigma must be non-negative, got {noise_sigma}")
        self._sigma = float(noise_sigma)
        self._seed = int(seed)

    def _evaluate(self, mask: Mask) -> float:
        if not mask:
            return self._baseline
        drop = sum(self._weights[h] for h in mask)
        if self._sigma > 0.0:
            rng = np.random.default_rng(_noise_seed(self._seed, mask))
            drop += self._sigma * float(rng.standard_normal())
        return self._baseline - drop


class SupermodularOracle(Oracle):
    """accuracy(S) = baseline - sum of drops - growth * |S| * (|S|-1) / 2.

    With growth > 0 the marginal damage of pruning one more head strictly
    increases with the number already pruned, which is the regime where a
    head's current cost is a safe underestimate of its future cost.
    """

    def __init__(self, baseline: float, weights, growth: float = 0.0,
                 geometry: Geometry | None = None):
        geometry, self._weights = _weights_table(weights, geometry)
        super().__init__(geometry, baseline)
        if any(w < 0 for w in self._weights.values()):
            raise ConfigError("supermodular weights must be non-negative")
        if growth < 0:
            raise ConfigError(f"growth must be non-negative, got {growth}")
        self._growth = float(growth)

    def _evaluate(self, mask: Mask) -> float:
        if not mask:
            return self._baseline
        size = len(mask)
        drop = sum(self._weights[h] for h in mask) + self._growth * size * (size - 1) / 2
        return self._baseline - drop


class TableOracle(Oracle):
    """Replays recorded (mask, accuracy) pairs. A missing mask is a hard error."""

    def __init__(self, geometry: Geometry, baseline: float, entries: dict[Mask, float]):
        super().__init__(geometry, baseline)
        self._entries = dict(entries)

    def _evaluate(self, mask: Mask) -> float:
        if not mask:
            return self._baseline
        try:
            return self._entries[mask]
        except KeyError:
            raise TableMissError(
                f"table oracle has no entry for mask {mask_to_pairs(mask)}"
            ) from None


def save_table(path, geometry: Geometry, baseline: float, entries: dict[Mask, float]) -> None:
    """Write a table-oracle file: baseline, geometry and the recorded entries.

    Entries are sorted by (mask length, mask) so the file is deterministic.
    """
    rows = [
        {"mask": mask_to_pairs(mask), "accuracy": accuracy}
        for mask, accuracy in sorted(entries.items(), key=lambda kv: (len(kv[0]), kv[0]))
    ]
    document = {
        "baseline": baseline,
        "geometry": [geometry.layers, geometry.heads_per_layer],
        "entries": rows,
    }
    with open(path, "w", encoding="utf-8") as handle:
        json.dump(document, handle, indent=2)
        handle.write("\n")


def load_table(path) -> TableOracle:
    try:
        with open(path, "r", encoding="utf-8") as handle:
            document = json.load(handle)
    except (OSError, json.JSONDecodeError) as exc:
        raise ConfigError(f"cannot read table oracle file {path}: {exc}") from exc
    try:
        layers, heads = document["geometry"]
        geometry = Geometry(int(layers), int(heads))
        baseline = _check_percent(document["baseline"], "table baseline")
        entries: dict[Mask, float] = {}
        for row in document["entries"]:
            mask = mask_from_pairs(row["mask"], geometry)
            accuracy = float(row["accuracy"])
            if mask in entries and entries[mask] != accuracy:
                raise ConfigError(f"table file has conflicting entries for mask {row['mask']}")
            entries[mask] = accuracy
    except (KeyError, TypeError, ValueError) as exc:
        raise ConfigError(f"malformed table oracle file {path}: {exc}") from exc
    if EMPTY_MASK in entries:
        if entries[EMPTY_MASK] != baseline:
            raise ConfigError(
                f"table file maps the empty mask to {entries[EMPTY_MASK]}, "
                f"but declares baseline {baseline}"
            )
        del entries[EMPTY_MASK]
    return TableOracle(geometry, baseline, entries)
