"""HTTP service wrapping the pruning engine.

Runs are executed server-side in a scratch directory and every artifact
file comes back inline in the response, so clients can persist a run
wherever they like. The service itself keeps no state between requests.
"""

from __future__ import annotations

import json
import tempfile
from pathlib import Path
from typing import Optional

from fastapi import FastAPI, Request
from fastapi.responses import JSONResponse
from pydantic import BaseModel, ConfigDict

from . import __version__
from .config import load_config
from .errors import ConfigError, InternalInvariantError, OracleError
from .runner import run, summarize_reports


class RunRequest(BaseModel):
    model_config = ConfigDict(extra="forbid")

    # Validated with load_config inside the handler so every violation comes
    # back in one config-error envelope rather than FastAPI's 422.
    config: dict
    record_table: bool = False


class RunSummary(BaseModel):
    strategy: str
    pruned_heads: int
    baseline_accuracy: float
    final_accuracy: float
    budget_given: Optional[float]
    budget_used: float
    budget_remaining: Optional[float]
    searches_computed: int
    searches_requested: int
    candidate_evaluations: int


class RunResponse(BaseModel):
    summary: RunSummary
    files: dict[str, str]


class SummarizeEntry(BaseModel):
    label: str
    report: dict


class SummarizeRequest(BaseModel):
    reports: list[SummarizeEntry]


class SummarizeResponse(BaseModel):
    csv: str


class HealthResponse(BaseModel):
    status: str
    version: str


def _read_files(directory: Path) -> dict[str, str]:
    return {
        path.name: path.read_text(encoding="utf-8")
        for path in sorted(directory.iterdir())
        if path.is_file()
    }


def _error_response(status: int, kind: str, message: str, *,
                    details: list[str] | None = None,
                    files: dict[str, str] | None = None) -> JSONResponse:
    body = {"error": {"kind": kind, "message": message, "details": details or []}}
    if files:
        body["error"]["files"] = files
    return JSONResponse(status_code=status, content=body)


def create_app() -> FastAPI:
    app = FastAPI(title="headprune", version=__version__)

    @app.exception_handler(ConfigError)
    async def config_error(_request: Request, exc: ConfigError):
        return _error_response(400, "config", "invalid configuration", details=exc.errors)

    @app.exception_handler(OracleError)
    async def oracle_error(_request: Request, exc: OracleError):
        return _error_response(502, "oracle", str(exc))

    @app.exception_handler(InternalInvariantError)
    async def invariant_error(_request: Request, exc: InternalInvariantError):
        return _error_response(500, "internal", str(exc))

    @app.exception_handler(Exception)
    async def unexpected_error(_request: Request, exc: Exception):
        return _error_response(500, "internal", f"{type(exc).__name__}: {exc}")

    @app.get("/health", response_model=HealthResponse)
    def health() -> HealthResponse:
        return HealthResponse(status="ok", version=__version__)

    @app.post("/runs", response_model=RunResponse)
    def execute_run(request: RunRequest):
        config = load_config(request.config)
        with tempfile.TemporaryDirectory(prefix="headprune-") as scratch:
            out = Path(scratch)
            try:
                run(config, out, record_table=request.record_table)
            except OracleError as exc:
                # Partial-trace artifacts, if any, ride along with the error.
                return _error_response(502, "oracle", str(exc), files=_read_files(out))
            solution_files = _read_files(out)
        document = json.loads(solution_files["run_report.json"])
        budget = document["budget"]
        return RunResponse(
            summary=RunSummary(
                strategy=document["strategy"],
                pruned_heads=len(document["pruned"]),
                baseline_accuracy=document["baseline_accuracy"],
                final_accuracy=document["final_accuracy"],
                budget_given=budget["given"],
                budget_used=budget["charged"],
                budget_remaining=budget["remaining"],
                searches_computed=document["evaluations"]["computed"],
                searches_requested=document["evaluations"]["requested"],
                candidate_evaluations=document["evaluations"]["candidate_evaluations"],
            ),
            files=solution_files,
        )

    @app.post("/summarize", response_model=SummarizeResponse)
    def summarize(request: SummarizeRequest):
        csv_text = summarize_reports([(entry.label, entry.report) for entry in request.reports])
        return SummarizeResponse(csv=csv_text)

    return app


app = create_app()
