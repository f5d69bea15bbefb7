/** A small encoder-style transformer classifier with hard per-head masking.
 *
 * Checkpoints are plain JSON; matrices are stored row-major as out x in, so
 * y = W x + b reads y[o] = sum_i W[o][i] * x[i] + b[o]. Head h owns rows
 * [h*headDim, (h+1)*headDim) of the query/key/value projections; masking a
 * head zeroes its context slice before the output projection, removing its
 * contribution to the forward pass entirely.
 */

import { readFileSync } from "node:fs";

export type Matrix = number[][];
export type Vector = number[];

export interface LayerWeights {
  wq: Matrix;
  bq: Vector;
  wk: Matrix;
  bk: Vector;
  wv: Matrix;
  bv: Vector;
  wo: Matrix;
  bo: Vector;
  ln1_gain: Vector;
  ln1_bias: Vector;
  ffn_w1: Matrix;
  ffn_b1: Vector;
  ffn_w2: Matrix;
  ffn_b2: Vector;
  ln2_gain: Vector;
  ln2_bias: Vector;
}

export interface ModelFile {
  format: string;
  hidden_size: number;
  layers: number;
  heads: number;
  ffn_size: number;
  max_positions: number;
  labels: number;
  vocab: string[];
  weights: {
    token_embeddings: Matrix;
    position_embeddings: Matrix;
    layers: LayerWeights[];
    classifier_w: Matrix;
    classifier_b: Vector;
  };
}

export const MODEL_FORMAT = "headprune-bridge-model/1";

const LN_EPS = 1e-5;

function matvec(w: Matrix, x: Vector, b: Vector): Vector {
  const out = new Array<number>(w.length);
  for (let o = 0; o < w.length; o++) {
    const row = w[o];
    let acc = b[o];
    for (let i = 0; i < row.length; i++) acc += row[i] * x[i];
    out[o] = acc;
  }
  return out;
}

function layerNorm(x: Vector, gain: Vector, bias: Vector): Vector {
  let mean = 0;
  for (const v of x) mean += v;
  mean /= x.length;
  let variance = 0;
  for (const v of x) variance += (v - mean) * (v - mean);
  variance /= x.length;
  const scale = 1 / Math.sqrt(variance + LN_EPS);
  return x.map((v, i) => (v - mean) * scale * gain[i] + bias[i]);
}

function softmaxInPlace(scores: number[]): void {
  let max = -Infinity;
  for (const s of scores) if (s > max) max = s;
  let total = 0;
  for (let i = 0; i < scores.length; i++) {
    scores[i] = Math.exp(scores[i] - max);
    total += scores[i];
  }
  for (let i = 0; i < scores.length; i++) scores[i] /= total;
}

export class Model {
  readonly hiddenSize: number;
  readonly layers: number;
  readonly heads: number;
  readonly headDim: number;
  readonly maxPositions: number;
  readonly labels: number;
  readonly vocab: string[];
  private readonly weights: ModelFile["weights"];

  constructor(file: ModelFile) {
    if (file.format !== MODEL_FORMAT) {
      throw new Error(`unsupported model format ${file.format}, expected ${MODEL_FORMAT}`);
    }
    if (file.hidden_size % file.heads !== 0) {
      throw new Error(`hidden size ${file.hidden_size} is not divisible by ${file.heads} heads`);
    }
    if (file.weights.layers.length !== file.layers) {
      throw new Error(
        `model declares ${file.layers} layers but ships ${file.weights.layers.length}`,
      );
    }
    this.hiddenSize = file.hidden_size;
    this.layers = file.layers;
    this.heads = file.heads;
    this.headDim = file.hidden_size / file.heads;
    this.maxPositions = file.max_positions;
    this.labels = file.labels;
    this.vocab = file.vocab;
    this.weights = file.weights;
  }

  static load(path: string): Model {
    return new Model(JSON.parse(readFileSync(path, "utf-8")) as ModelFile);
  }

  /** Predicted class for a token sequence, with the listed heads masked.
   * maskedByLayer[i] is the set of masked head indices in layer i. */
  predict(tokenIds: readonly number[], maskedByLayer: ReadonlyArray<ReadonlySet<number>>): number {
    const d = this.hiddenSize;
    const seq = tokenIds.length;
    let states: Vector[] = tokenIds.map((id, position) => {
      const token = this.weights.token_embeddings[id];
      const positional = this.weights.position_embeddings[position];
      const x = new Array<number>(d);
      for (let i = 0; i < d; i++) x[i] = token[i] + positional[i];
      return x;
    });

    for (let layer = 0; layer < this.layers; layer++) {
      const lw = this.weights.layers[layer];
      const masked = maskedByLayer[layer];
      const queries = states.map((x) => matvec(lw.wq, x, lw.bq));
      const keys = states.map((x) => matvec(lw.wk, x, lw.bk));
      const values = states.map((x) => matvec(lw.wv, x, lw.bv));

      const contexts: Vector[] = states.map(() => new Array<number>(d).fill(0));
      const scale = 1 / Math.sqrt(this.headDim);
      for (let head = 0; head < this.heads; head++) {
        if (masked.has(head)) continue; // hard masking: no contribution at all
        const offset = head * this.headDim;
        for (let t = 0; t < seq; t++) {
          const scores = new Array<number>(seq);
          for (let s = 0; s < seq; s++) {
            let dot = 0;
            for (let k = 0; k < this.headDim; k++) {
              dot += queries[t][offset + k] * keys[s][offset + k];
            }
            scores[s] = dot * scale;
          }
          softmaxInPlace(scores);
          const ctx = contexts[t];
          for (let s = 0; s < seq; s++) {
            const weight = scores[s];
            for (let k = 0; k < this.headDim; k++) {
              ctx[offset + k] += weight * values[s][offset + k];
            }
          }
        }
      }

      states = states.map((x, t) => {
        const attention = matvec(lw.wo, contexts[t], lw.bo);
        const withAttention = x.map((v, i) => v + attention[i]);
        const normed = layerNorm(withAttention, lw.ln1_gain, lw.ln1_bias);
        const hidden = matvec(lw.ffn_w1, normed, lw.ffn_b1).map((v) => (v > 0 ? v : 0));
        const ffn = matvec(lw.ffn_w2, hidden, lw.ffn_b2);
        const withFfn = normed.map((v, i) => v + ffn[i]);
        return layerNorm(withFfn, lw.ln2_gain, lw.ln2_bias);
      });
    }

    const logits = matvec(this.weights.classifier_w, states[0], this.weights.classifier_b);
    let best = 0;
    for (let c = 1; c < logits.length; c++) {
      if (logits[c] > logits[best]) best = c;
    }
    return best;
  }
}
