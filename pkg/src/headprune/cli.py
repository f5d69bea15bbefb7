"""Command-line client for the pruning service.

Every command speaks HTTP to the service. With --server it targets a
running instance; without it the service app is mounted in-process, so the
CLI works standalone while exercising exactly the server code path.

Exit codes: 0 success, 2 config error, 3 oracle/bridge failure, 4 internal
invariant violation.
"""

from __future__ import annotations

import json
import sys
from pathlib import Path

import click
import httpx

EXIT_OK = 0
EXIT_CONFIG = 2
EXIT_ORACLE = 3
EXIT_INTERNAL = 4

STRATEGIES = ("astar", "local", "global", "random")


def _client(server: str | None) -> httpx.Client:
    if server:
        return httpx.Client(base_url=server, timeout=600.0)
    import warnings

    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        from fastapi.testclient import TestClient

    from .service import app

    return TestClient(app, raise_server_exceptions=False)


def _fail(code: int, message: str, details=None):
    click.echo(f"error: {message}", err=True)
    for detail in details or []:
        click.echo(f"  - {detail}", err=True)
    sys.exit(code)


def _exit_code_for(status: int, kind: str | None) -> int:
    if kind == "config" or status in (400, 422):
        return EXIT_CONFIG
    if kind == "oracle" or status == 502:
        return EXIT_ORACLE
    return EXIT_INTERNAL


def _load_config_document(path: str) -> dict:
    try:
        document = json.loads(Path(path).read_text(encoding="utf-8"))
    except OSError as exc:
        _fail(EXIT_CONFIG, f"cannot read config file {path}: {exc}")
    except json.JSONDecodeError as exc:
        _fail(EXIT_CONFIG, f"config file {path} is not valid JSON: {exc}")
    if not isinstance(document, dict):
        _fail(EXIT_CONFIG, f"config file {path} must hold a JSON object")
    return document


def _apply_overrides(document: dict, *, strategy=None, budget=None, seed=None,
                     workers=None, trials=None, out=None) -> dict:
    # Precedence: flags > config file > defaults.
    if strategy is not None:
        document["strategy"] = strategy
    if budget is not None:
        document["budget"] = None if budget.lower() == "unbounded" else float(budget)
    if seed is not None:
        document["seed"] = seed
    if workers is not None:
        document["workers"] = workers
    if trials is not None:
        document["trials"] = trials
    if out is not None:
        document["output_dir"] = str(out)
    return document


def _write_files(out_dir: Path, files: dict[str, str]) -> None:
    out_dir.mkdir(parents=True, exist_ok=True)
    for name, content in files.items():
        (out_dir / name).write_text(content, encoding="utf-8")


def _post_run(client: httpx.Client, document: dict, out: str | None, record_table: bool):
    try:
        response = client.post("/runs", json={"config": document, "record_table": record_table})
    except httpx.HTTPError as exc:
        _fail(EXIT_ORACLE, f"cannot reach the pruning service: {exc}")
    out_dir = Path(out or document.get("output_dir") or "prune-run")
    if response.status_code >= 300:
        payload = _error_payload(response)
        files = payload.get("files") or {}
        if files:
            _write_files(out_dir, files)
            click.echo(f"partial artifacts written to {out_dir}", err=True)
        _fail(_exit_code_for(response.status_code, payload.get("kind")),
              payload.get("message", f"service returned {response.status_code}"),
              payload.get("details"))
    body = response.json()
    _write_files(out_dir, body["files"])
    summary = body["summary"]
    given = summary["budget_given"]
    click.echo(f"strategy:   {summary['strategy']}")
    click.echo(f"pruned:     {summary['pruned_heads']} heads")
    click.echo(f"accuracy:   {summary['baseline_accuracy']} -> {summary['final_accuracy']}")
    click.echo(f"budget:     given={'unbounded' if given is None else given} "
               f"used={summary['budget_used']}")
    click.echo(f"searches:   {summary['searches_computed']} computed "
               f"({summary['candidate_evaluations']} candidate evaluations)")
    click.echo(f"artifacts:  {out_dir}")


def _error_payload(response: httpx.Response) -> dict:
    try:
        body = response.json()
    except json.JSONDecodeError:
        return {"message": response.text[:500]}
    if isinstance(body, dict) and isinstance(body.get("error"), dict):
        return body["error"]
    if isinstance(body, dict) and "detail" in body:
        # FastAPI request-validation payload.
        detail = body["detail"]
        if isinstance(detail, list):
            details = [
                f"{'.'.join(str(p) for p in item.get('loc', []))}: {item.get('msg', '')}"
                for item in detail
            ]
            return {"kind": "config", "message": "invalid request", "details": details}
        return {"kind": "config", "message": str(detail)}
    return {"message": response.text[:500]}


@click.group()
@click.option("--server", envvar="HEADPRUNE_SERVER", default=None,
              help="Base URL of a running service; default runs in-process.")
@click.pass_context
def main(ctx, server):
    """Budget-constrained attention-head pruning."""
    ctx.obj = {"server": server}


@main.command()
@click.argument("strategy", type=click.Choice(STRATEGIES))
@click.option("--config", "config_path", required=True, type=click.Path(), help="Run config JSON.")
@click.option("--budget", default=None, help="Accuracy budget in points, or 'unbounded'.")
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--trials", type=int, default=None, help="Random-strategy trial count.")
@click.option("--out", type=click.Path(), default=None, help="Artifact directory.")
@click.option("--record-table", is_flag=True, help="Also dump computed evaluations as a table-oracle file.")
@click.pass_context
def prune(ctx, strategy, config_path, budget, seed, workers, trials, out, record_table):
    """Run one pruning experiment and write its artifacts."""
    document = _apply_overrides(_load_config_document(config_path), strategy=strategy,
                                budget=budget, seed=seed, workers=workers, trials=trials, out=out)
    with _client(ctx.obj["server"]) as client:
        _post_run(client, document, out, record_table)


@main.command("record-table")
@click.option("--config", "config_path", required=True, type=click.Path())
@click.option("--budget", default=None)
@click.option("--seed", type=int, default=None)
@click.option("--workers", type=int, default=None)
@click.option("--trials", type=int, default=None)
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def record_table(ctx, config_path, budget, seed, workers, trials, out):
    """Run the configured experiment and dump every computed evaluation as a
    table-oracle file (oracle_table.json) for later replay."""
    document = _apply_overrides(_load_config_document(config_path), budget=budget,
                                seed=seed, workers=workers, trials=trials, out=out)
    with _client(ctx.obj["server"]) as client:
        _post_run(client, document, out, record_table=True)


@main.command()
@click.option("--table", "table_path", required=True, type=click.Path(),
              help="Table-oracle file recorded from a previous run.")
@click.option("--config", "config_path", required=True, type=click.Path(),
              help="The original run config; its oracle section is replaced.")
@click.option("--out", type=click.Path(), default=None)
@click.pass_context
def replay(ctx, table_path, config_path, out):
    """Re-run an experiment against a recorded table oracle."""
    document = _load_config_document(config_path)
    document["oracle"] = {"table": {"path": str(Path(table_path).resolve())}}
    document.pop("geometry", None)
    if out is not None:
        document["output_dir"] = str(out)
    with _client(ctx.obj["server"]) as client:
        _post_run(client, document, out, record_table=False)


@main.command()
@click.argument("dirs", nargs=-1, required=True, type=click.Path())
@click.option("--out", type=click.Path(), default=None, help="Write the CSV here instead of stdout.")
@click.pass_context
def summarize(ctx, dirs, out):
    """Tabulate budget accounting across run directories."""
    entries = []
    for directory in dirs:
        report_path = Path(directory) / "run_report.json"
        try:
            report = json.loads(report_path.read_text(encoding="utf-8"))
        except OSError as exc:
            _fail(EXIT_CONFIG, f"cannot read {report_path}: {exc}")
        except json.JSONDecodeError as exc:
            _fail(EXIT_CONFIG, f"{report_path} is not valid JSON: {exc}")
        entries.append({"label": Path(directory).name, "report": report})
    with _client(ctx.obj["server"]) as client:
        try:
            response = client.post("/summarize", json={"reports": entries})
        except httpx.HTTPError as exc:
            _fail(EXIT_ORACLE, f"cannot reach the pruning service: {exc}")
        if response.status_code >= 300:
            payload = _error_payload(response)
            _fail(_exit_code_for(response.status_code, payload.get("kind")),
                  payload.get("message", "summarize failed"), payload.get("details"))
        csv_text = response.json()["csv"]
    if out:
        Path(out).write_text(csv_text, encoding="utf-8")
        click.echo(f"summary written to {out}")
    else:
        click.echo(csv_text, nl=False)


@main.command()
@click.option("--host", default="127.0.0.1")
@click.option("--port", type=int, default=8750)
def serve(host, port):
    """Run the pruning service with uvicorn."""
    import uvicorn

    uvicorn.run("headprune.service:app", host=host, port=port)


if __name__ == "__main__":
    main()
