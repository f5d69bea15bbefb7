import { readFileSync } from "node:fs";
import Papa from "papaparse";

export interface Example {
  text: string;
  label: number;
}

/** Load a labelled text dataset: CSV with `text` and `label` columns. */
export function loadDataset(path: string, labelCount: number): Example[] {
  const raw = readFileSync(path, "utf-8");
  const parsed = Papa.parse<Record<string, string>>(raw, {
    header: true,
    skipEmptyLines: true,
  });
  if (parsed.errors.length > 0) {
    const first = parsed.errors[0];
    throw new Error(`cannot parse dataset ${path}: ${first.message} (row ${first.row})`);
  }
  const examples: Example[] = [];
  parsed.data.forEach((row, index) => {
    const text = row["text"];
    const labelText = row["label"];
    if (text === undefined || labelText === undefined) {
      throw new Error(`dataset ${path} row ${index + 1} is missing text/label columns`);
    }
    const label = Number(labelText);
    if (!Number.isInteger(label) || label < 0 || label >= labelCount) {
      throw new Error(
        `dataset ${path} row ${index + 1} has label ${labelText}, expected 0..${labelCount - 1}`,
      );
    }
    examples.push({ text, label });
  });
  if (examples.length === 0) {
    throw new Error(`dataset ${path} contains no examples`);
  }
  return examples;
}
