"""Run configuration: one JSON document, validated with pydantic.

Exactly one oracle spec must be present under "oracle". CLI flags override
file fields, which override defaults. `budget: null` means unbounded.
"""

from __future__ import annotations

import hashlib
import json
from typing import Literal, Optional

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from .errors import ConfigError
from .heads import Geometry
from .oracles import AdditiveOracle, Oracle, SupermodularOracle, load_table


class GeometryModel(BaseModel):
    model_config = ConfigDict(extra="forbid")

    layers: int = Field(ge=1)
    heads_per_layer: int = Field(ge=1)

    def to_geometry(self) -> Geometry:
        return Geometry(self.layers, self.heads_per_layer)


class AdditiveSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    baseline: float = Field(ge=0, le=100)
    weights: list[list[float]] = Field(min_length=1)
    noise_sigma: float = Field(default=0.0, ge=0)
    seed: int = 0


class SupermodularSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    baseline: float = Field(ge=0, le=100)
    weights: list[list[float]] = Field(min_length=1)
    growth: float = Field(default=0.0, ge=0)


class TableSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    path: str


class ExternalSpec(BaseModel):
    model_config = ConfigDict(extra="forbid")

    command: list[str] = Field(min_length=1)
    cwd: Optional[str] = None


class OracleConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    additive: Optional[AdditiveSpec] = None
    supermodular: Optional[SupermodularSpec] = None
    table: Optional[TableSpec] = None
    external: Optional[ExternalSpec] = None

    @model_validator(mode="after")
    def _exactly_one(self):
        present = [name for name in ("additive", "supermodular", "table", "external")
                   if getattr(self, name) is not None]
        if len(present) != 1:
            raise ValueError(
                f"exactly one oracle spec is required, got {present or 'none'}"
            )
        return self

    @property
    def kind(self) -> str:
        for name in ("additive", "supermodular", "table", "external"):
            if getattr(self, name) is not None:
                return name
        raise AssertionError("unvalidated oracle config")


class ModelDims(BaseModel):
    model_config = ConfigDict(extra="forbid")

    hidden_size: int = Field(ge=1)
    heads: int = Field(ge=1)
    total_parameters: int = Field(ge=0)


class RunConfig(BaseModel):
    model_config = ConfigDict(extra="forbid")

    strategy: Literal["astar", "local", "global", "random"]
    oracle: OracleConfig
    budget: Optional[float] = Field(default=None, ge=0)  # None = unbounded
    geometry: Optional[GeometryModel] = None
    cost_mode: Literal["incremental", "baseline"] = "incremental"
    seed: int = 0
    trials: int = Field(default=100, ge=1)
    workers: int = Field(default=1, ge=1)
    output_dir: Optional[str] = None
    model_dims: Optional[ModelDims] = None

    @model_validator(mode="after")
    def _cross_checks(self):
        problems = []
        spec = self.oracle.additive or self.oracle.supermodular
        if spec is not None:
            widths = {len(row) for row in spec.weights}
            if len(widths) != 1 or 0 in widths:
                problems.append("oracle.weights must be a non-empty rectangular matrix")
            elif self.geometry is not None:
                shape = (self.geometry.layers, self.geometry.heads_per_layer)
                if shape != (len(spec.weights), len(spec.weights[0])):
                    problems.append(
                        f"geometry {shape[0]}x{shape[1]} does not match weights "
                        f"{len(spec.weights)}x{len(spec.weights[0])}"
                    )
        if self.strategy == "random" and self.budget is None:
            problems.append("random strategy requires a finite budget")
        if problems:
            raise ValueError("; ".join(problems))
        return self


def load_config(document: dict | str | bytes) -> RunConfig:
    """Validate a config document, collecting every violation into ConfigError."""
    if isinstance(document, (str, bytes)):
        try:
            document = json.loads(document)
        except json.JSONDecodeError as exc:
            raise ConfigError(f"config is not valid JSON: {exc}") from exc
    try:
        return RunConfig.model_validate(document)
    except ValidationError as exc:
        raise ConfigError([
            f"{'.'.join(str(p) for p in err['loc']) or 'config'}: {err['msg']}"
            for err in exc.errors()
        ]) from exc


def build_oracle(config: RunConfig) -> Oracle:
    """Instantiate the configured oracle. External oracles spawn their child
    process here; callers are responsible for close()."""
    from .external import ExternalOracle  # deferred: subprocess machinery

    oracle_config = config.oracle
    geometry = config.geometry.to_geometry() if config.geometry else None
    if oracle_config.additive is not None:
        spec = oracle_config.additive
        return AdditiveOracle(spec.baseline, spec.weights, spec.noise_sigma, spec.seed,
                              geometry=geometry)
    if oracle_config.supermodular is not None:
        spec = oracle_config.supermodular
        return SupermodularOracle(spec.baseline, spec.weights, spec.growth, geometry=geometry)
    if oracle_config.table is not None:
        oracle = load_table(oracle_config.table.path)
        if geometry is not None and geometry != oracle.geometry:
            raise ConfigError(
                f"config geometry {geometry.layers}x{geometry.heads_per_layer} does not "
                f"match table geometry {oracle.geometry.layers}x{oracle.geometry.heads_per_layer}"
            )
        return oracle
    spec = oracle_config.external
    oracle = ExternalOracle(spec.command, cwd=spec.cwd)
    if geometry is not None and geometry != oracle.geometry:
        reported = oracle.geometry
        oracle.close()
        raise ConfigError(
            f"config geometry {geometry.layers}x{geometry.heads_per_layer} does not match "
            f"evaluator geometry {reported.layers}x{reported.heads_per_layer}"
        )
    return oracle


def config_hash(config: RunConfig) -> str:
    payload = json.dumps(config.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()


def oracle_spec_hash(config: RunConfig) -> str:
    payload = json.dumps(config.oracle.model_dump(), sort_keys=True, separators=(",", ":"))
    return hashlib.sha256(payload.encode()).hexdigest()
