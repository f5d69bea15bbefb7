"""Reference stdio evaluator backed by a synthetic or table oracle.

Usage: python -m headprune.mock_evaluator SPEC.json

SPEC.json holds one oracle spec, the same shape as a run config's "oracle"
section, e.g. {"additive": {"baseline": 90, "weights": [[0.1, 0.2]]}}.
Serves the evaluate protocol on stdin/stdout until "bye" or EOF. Useful for
exercising external-oracle mode without a real model process.
"""

from __future__ import annotations

import json
import sys

from .config import OracleConfig
from .errors import BoundsError, ConfigError, HeadPruneError
from .heads import mask_from_pairs
from .oracles import AdditiveOracle, Oracle, SupermodularOracle, load_table


def _build(spec: OracleConfig) -> Oracle:
    if spec.additive is not None:
        s = spec.additive
        return AdditiveOracle(s.baseline, s.weights, s.noise_sigma, s.seed)
    if spec.supermodular is not None:
        s = spec.supermodular
        return SupermodularOracle(s.baseline, s.weights, s.growth)
    if spec.table is not None:
        return load_table(spec.table.path)
    raise ConfigError("mock evaluator supports additive, supermodular and table specs only")


def serve(oracle: Oracle, stdin=None, stdout=None) -> None:
    stdin = stdin or sys.stdin
    stdout = stdout or sys.stdout

    def reply(frame: dict) -> None:
        stdout.write(json.dumps(frame, separators=(",", ":")) + "\n")
        stdout.flush()

    for line in stdin:
        line = line.strip()
        if not line:
            continue
        try:
            frame = json.loads(line)
        except json.JSONDecodeError:
            reply({"op": "error", "id": 0, "message": f"not a JSON frame: {line[:120]}"})
            continue
        op = frame.get("op")
        if op == "hello":
            reply({
                "op": "hello",
                "layers": oracle.geometry.layers,
                "heads": oracle.geometry.heads_per_layer,
                "baseline": oracle.baseline_accuracy,
            })
        elif op == "evaluate":
            request_id = frame.get("id", 0)
            try:
                mask = mask_from_pairs(frame["mask"], oracle.geometry)
                accuracy = oracle.evaluate(mask)
            except (BoundsError, KeyError, TypeError, ValueError, HeadPruneError) as exc:
                reply({"op": "error", "id": request_id, "message": str(exc)})
                continue
            reply({"op": "result", "id": request_id, "accuracy": accuracy})
        elif op == "bye":
            return
        else:
            reply({"op": "error", "id": frame.get("id", 0), "message": f"unknown op {op!r}"})


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else argv
    if len(argv) != 1:
        print("usage: python -m headprune.mock_evaluator SPEC.json", file=sys.stderr)
        return 2
    try:
        with open(argv[0], "r", encoding="utf-8") as handle:
            document = json.load(handle)
        spec = OracleConfig.model_validate(document)
        oracle = _build(spec)
    except Exception as exc:
        print(f"mock evaluator failed to load spec: {exc}", file=sys.stderr)
        return 1
    serve(oracle)
    return 0


if __name__ == "__main__":
    sys.exit(main())
