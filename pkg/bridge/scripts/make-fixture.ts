/** Regenerates fixtures/model.json: a small seeded encoder checkpoint whose
 * vocabulary is built from fixtures/reviews.csv. Deterministic, so the
 * checked-in fixture is reproducible: `npm run make-fixture`. */

import { readFileSync, writeFileSync } from "node:fs";
import { dirname, join } from "node:path";
import { fileURLToPath } from "node:url";

import Papa from "papaparse";

import { mulberry32 } from "../src/prng.js";
import { MODEL_FORMAT, type LayerWeights, type ModelFile } from "../src/model.js";
import { CLS_TOKEN, Tokenizer, UNK_TOKEN } from "../src/tokenizer.js";

const HIDDEN = 32;
const HEADS = 4;
const LAYERS = 3;
const FFN = 64;
const MAX_POSITIONS = 16;
const LABELS = 2;
const SEED = 20250810;

const here = dirname(fileURLToPath(import.meta.url));
const fixtures = join(here, "..", "fixtures");

const random = mulberry32(SEED);

function uniform(scale: number): number {
  return (random() * 2 - 1) * scale;
}

function matrix(rows: number, cols: number, scale: number): number[][] {
  return Array.from({ length: rows }, () =>
    Array.from({ length: cols }, () => round(uniform(scale))),
  );
}

function vector(size: number, scale: number, offset = 0): number[] {
  return Array.from({ length: size }, () => round(offset + uniform(scale)));
}

// 6 decimal places keep the file small without affecting determinism.
function round(value: number): number {
  return Math.round(value * 1e6) / 1e6;
}

function buildVocab(): string[] {
  const csv = readFileSync(join(fixtures, "reviews.csv"), "utf-8");
  const parsed = Papa.parse<Record<string, string>>(csv, { header: true, skipEmptyLines: true });
  const words = new Set<string>();
  for (const row of parsed.data) {
    for (const word of Tokenizer.normalize(row["text"] ?? "")) {
      words.add(word);
    }
  }
  return [CLS_TOKEN, UNK_TOKEN, ...[...words].sort()];
}

function buildLayer(): LayerWeights {
  const projectionScale = 1 / Math.sqrt(HIDDEN);
  // Strong value/output projections so masking a head visibly moves the
  // logits; with tiny scales the classifier margin swamps every mask.
  const attentionScale = 4 / Math.sqrt(HIDDEN);
  const ffnScale = 1 / Math.sqrt(FFN);
  return {
    wq: matrix(HIDDEN, HIDDEN, projectionScale),
    bq: vector(HIDDEN, 0.02),
    wk: matrix(HIDDEN, HIDDEN, projectionScale),
    bk: vector(HIDDEN, 0.02),
    wv: matrix(HIDDEN, HIDDEN, attentionScale),
    bv: vector(HIDDEN, 0.02),
    wo: matrix(HIDDEN, HIDDEN, attentionScale),
    bo: vector(HIDDEN, 0.02),
    ln1_gain: vector(HIDDEN, 0.05, 1.0),
    ln1_bias: vector(HIDDEN, 0.02),
    ffn_w1: matrix(FFN, HIDDEN, projectionScale),
    ffn_b1: vector(FFN, 0.02),
    ffn_w2: matrix(HIDDEN, FFN, ffnScale),
    ffn_b2: vector(HIDDEN, 0.02),
    ln2_gain: vector(HIDDEN, 0.05, 1.0),
    ln2_bias: vector(HIDDEN, 0.02),
  };
}

const vocab = buildVocab();
const model: ModelFile = {
  format: MODEL_FORMAT,
  hidden_size: HIDDEN,
  layers: LAYERS,
  heads: HEADS,
  ffn_size: FFN,
  max_positions: MAX_POSITIONS,
  labels: LABELS,
  vocab,
  weights: {
    token_embeddings: matrix(vocab.length, HIDDEN, 0.5),
    position_embeddings: matrix(MAX_POSITIONS, HIDDEN, 0.1),
    layers: Array.from({ length: LAYERS }, () => buildLayer()),
    classifier_w: matrix(LABELS, HIDDEN, 1 / Math.sqrt(HIDDEN)),
    classifier_b: vector(LABELS, 0.02),
  },
};

const target = join(fixtures, "model.json");
writeFileSync(target, JSON.stringify(model) + "\n");
console.log(`wrote ${target} (vocab ${vocab.length}, ${LAYERS}x${HEADS} heads)`);
