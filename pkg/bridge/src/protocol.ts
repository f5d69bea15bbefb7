/** Wire frames spoken over stdin/stdout: single-line JSON, newline-delimited.
 *
 * Requests:  {"op":"hello"} | {"op":"evaluate","id":K,"mask":[[i,j],...]} | {"op":"bye"}
 * Replies:   {"op":"hello","layers":L,"heads":N,"baseline":F}
 *            {"op":"result","id":K,"accuracy":F}
 *            {"op":"error","id":K,"message":"..."}
 */

export interface HelloReply {
  op: "hello";
  layers: number;
  heads: number;
  baseline: number;
}

export interface ResultReply {
  op: "result";
  id: number;
  accuracy: number;
}

export interface ErrorReply {
  op: "error";
  id: number;
  message: string;
}

export type Reply = HelloReply | ResultReply | ErrorReply;

export type MaskPairs = Array<[number, number]>;

export function encodeFrame(frame: Reply): string {
  return JSON.stringify(frame) + "\n";
}

export function parseMask(value: unknown): MaskPairs {
  if (!Array.isArray(value)) {
    throw new Error("mask must be an array of [layer, head] pairs");
  }
  return value.map((entry) => {
    if (!Array.isArray(entry) || entry.length !== 2 ||
        !Number.isInteger(entry[0]) || !Number.isInteger(entry[1])) {
      throw new Error(`mask entry ${JSON.stringify(entry)} is not a [layer, head] pair`);
    }
    return [entry[0], entry[1]];
  });
}
