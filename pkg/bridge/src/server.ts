import { createInterface } from "node:readline";
import type { Writable } from "node:stream";

import type { Evaluator } from "./evaluator.js";
import { encodeFrame, parseMask, type Reply } from "./protocol.js";

/** Serve the evaluate protocol until "bye" or EOF. Requests are handled
 * strictly in order, one at a time. */
export function serve(
  evaluator: Evaluator,
  input: NodeJS.ReadableStream,
  output: Writable,
): Promise<void> {
  const reply = (frame: Reply) => {
    output.write(encodeFrame(frame));
  };

  return new Promise((resolvePromise) => {
    const lines = createInterface({ input, terminal: false });
    lines.on("line", (line) => {
      const text = line.trim();
      if (text === "") return;

      let frame: Record<string, unknown>;
      try {
        frame = JSON.parse(text);
      } catch {
        reply({ op: "error", id: 0, message: `not a JSON frame: ${text.slice(0, 120)}` });
        return;
      }

      const op = frame["op"];
      if (op === "hello") {
        reply({
          op: "hello",
          layers: evaluator.layers,
          heads: evaluator.heads,
          baseline: evaluator.baseline,
        });
      } else if (op === "evaluate") {
        const id = typeof frame["id"] === "number" ? frame["id"] : 0;
        try {
          const accuracy = evaluator.accuracy(parseMask(frame["mask"]));
          reply({ op: "result", id, accuracy });
        } catch (error) {
          reply({ op: "error", id, message: error instanceof Error ? error.message : String(error) });
        }
      } else if (op === "bye") {
        lines.close();
        // Release stdin so the event loop can drain even if the peer keeps
        // the pipe open after saying goodbye.
        (input as { destroy?: () => void }).destroy?.();
        resolvePromise();
      } else {
        const id = typeof frame["id"] === "number" ? frame["id"] : 0;
        reply({ op: "error", id, message: `unknown op ${JSON.stringify(op)}` });
      }
    });
    lines.on("close", () => resolvePromise());
  });
}
