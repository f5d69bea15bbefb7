"""Client for an external evaluator process.

The evaluator is any program that answers single-line JSON frames on its
standard input/output:

    -> {"op": "hello"}
    <- {"op": "hello", "layers": L, "heads": N, "baseline": F}
    -> {"op": "evaluate", "id": K, "mask": [[i, j], ...]}
    <- {"op": "result", "id": K, "accuracy": F}
    <- {"op": "error", "id": K, "message": "..."}      (aborts the run)
    -> {"op": "bye"}                                    (then stdin closes)

Ids are strictly increasing integers and replies must come back in request
order; masks are sent in canonical order. Requests are serialized over the
pipe, so one client equals one in-flight evaluation.
"""

from __future__ import annotations

import json
import subprocess
from typing import Sequence

from .errors import OracleError, ProtocolError
from .heads import Geometry, Mask, mask_to_pairs
from .oracles import Oracle, OracleInfo, _check_percent


class ExternalOracle(Oracle):
    """Runs the evaluator as a child process and proxies evaluate() to it."""

    def __init__(self, command: Sequence[str], cwd: str | None = None):
        self._command = list(command)
        try:
            self._child = subprocess.Popen(
                self._command,
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
                cwd=cwd,
                text=True,
                bufsize=1,
            )
        except OSError as exc:
            raise OracleError(f"cannot start evaluator {self._command!r}: {exc}") from exc
        self._next_id = 1
        self._closed = False
        info = self._handshake()
        super().__init__(info.geometry, info.baseline_accuracy)

    def _send(self, frame: dict) -> None:
        assert self._child.stdin is not None
        try:
            self._child.stdin.write(json.dumps(frame, separators=(",", ":")) + "\n")
            self._child.stdin.flush()
        except (BrokenPipeError, OSError) as exc:
            raise ProtocolError(f"evaluator pipe closed while sending {frame.get('op')}: {exc}") from exc

    def _receive(self) -> dict:
        assert self._child.stdout is not None
        line = self._child.stdout.readline()
        if line == "":
            code = self._child.poll()
            raise ProtocolError(
                f"evaluator closed its output unexpectedly (exit status {code})"
            )
        try:
            frame = json.loads(line)
        except json.JSONDecodeError as exc:
            raise ProtocolError(f"evaluator sent a non-JSON line: {line!r}") from exc
        if not isinstance(frame, dict):
            raise ProtocolError(f"evaluator sent a non-object frame: {line!r}")
        return frame

    def _handshake(self) -> OracleInfo:
        self._send({"op": "hello"})
        frame = self._receive()
        if frame.get("op") != "hello":
            raise ProtocolError(f"expected a hello reply, got {frame!r}")
        try:
            layers = int(frame["layers"])
            heads = int(frame["heads"])
            baseline = float(frame["baseline"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed hello reply {frame!r}: {exc}") from exc
        if layers < 1 or heads < 1:
            raise ProtocolError(f"evaluator reported an empty geometry {layers}x{heads}")
        try:
            baseline = _check_percent(baseline, "evaluator baseline")
        except Exception as exc:
            raise ProtocolError(str(exc)) from exc
        return OracleInfo(Geometry(layers, heads), baseline)

    def _evaluate(self, mask: Mask) -> float:
        request_id = self._next_id
        self._next_id += 1
        self._send({"op": "evaluate", "id": request_id, "mask": mask_to_pairs(mask)})
        frame = self._receive()
        op = frame.get("op")
        if op == "error":
            raise OracleError(f"evaluator error: {frame.get('message', '(no message)')}")
        if op != "result":
            raise ProtocolError(f"expected a result frame, got {frame!r}")
        if frame.get("id") != request_id:
            raise ProtocolError(
                f"result id {frame.get('id')!r} does not match request id {request_id}"
            )
        try:
            return float(frame["accuracy"])
        except (KeyError, TypeError, ValueError) as exc:
            raise ProtocolError(f"malformed result frame {frame!r}: {exc}") from exc

    def close(self):
        if self._closed:
            return
        self._closed = True
        try:
            self._send({"op": "bye"})
        except ProtocolError:
            pass
        try:
            if self._child.stdin is not None:
                self._child.stdin.close()
        except OSError:
            pass
        try:
            self._child.wait(timeout=5)
        except subprocess.TimeoutExpired:
            self._child.kill()
            self._child.wait()
