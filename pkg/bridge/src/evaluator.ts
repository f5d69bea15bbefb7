import { readFileSync } from "node:fs";
import { dirname, resolve } from "node:path";
import { z } from "zod";

import { loadDataset, type Example } from "./dataset.js";
import { Model } from "./model.js";
import { mulberry32, shuffled } from "./prng.js";
import type { MaskPairs } from "./protocol.js";
import { Tokenizer } from "./tokenizer.js";

export const configSchema = z.object({
  model: z.string(),
  dataset: z.string(),
  max_seq_length: z.number().int().min(2).default(16),
  batch_size: z.number().int().min(1).default(8),
  device: z.literal("cpu").default("cpu"),
  subset_size: z.number().int().min(1).default(32),
  seed: z.number().int().default(0),
});

export type BridgeConfig = z.infer<typeof configSchema>;

export function loadConfig(path: string): BridgeConfig {
  const parsed = configSchema.safeParse(JSON.parse(readFileSync(path, "utf-8")));
  if (!parsed.success) {
    const issues = parsed.error.issues
      .map((issue) => `${issue.path.join(".") || "config"}: ${issue.message}`)
      .join("; ");
    throw new Error(`invalid bridge config ${path}: ${issues}`);
  }
  const config = parsed.data;
  // Paths are relative to the config file, so the bridge can be spawned
  // from any working directory.
  const base = dirname(resolve(path));
  return {
    ...config,
    model: resolve(base, config.model),
    dataset: resolve(base, config.dataset),
  };
}

/** Measures test accuracy for head masks against a frozen evaluation subset.
 * The subset and its order are fixed at construction from the seed, so the
 * accuracy is a pure function of the mask. */
export class Evaluator {
  readonly model: Model;
  readonly baseline: number;
  private readonly tokenized: Array<{ ids: number[]; label: number }>;
  private readonly batchSize: number;

  constructor(model: Model, examples: Example[], config: BridgeConfig) {
    this.model = model;
    this.batchSize = config.batch_size;
    const tokenizer = new Tokenizer(model.vocab);
    const maxLength = Math.min(config.max_seq_length, model.maxPositions);
    const order = shuffled(examples.map((_, i) => i), mulberry32(config.seed >>> 0));
    const subset = order.slice(0, Math.min(config.subset_size, examples.length));
    this.tokenized = subset.map((index) => ({
      ids: tokenizer.encode(examples[index].text, maxLength),
      label: examples[index].label,
    }));
    this.baseline = this.accuracy([]);
  }

  static fromConfig(config: BridgeConfig): Evaluator {
    const model = Model.load(config.model);
    const examples = loadDataset(config.dataset, model.labels);
    return new Evaluator(model, examples, config);
  }

  get layers(): number {
    return this.model.layers;
  }

  get heads(): number {
    return this.model.heads;
  }

  /** Masked-out heads per layer; rejects anything outside the model grid. */
  private maskSets(mask: MaskPairs): Array<Set<number>> {
    const byLayer = Array.from({ length: this.model.layers }, () => new Set<number>());
    for (const [layer, head] of mask) {
      if (layer < 0 || layer >= this.model.layers || head < 0 || head >= this.model.heads) {
        throw new RangeError(
          `head (layer=${layer}, head=${head}) is outside the ` +
            `${this.model.layers}x${this.model.heads} grid`,
        );
      }
      byLayer[layer].add(head);
    }
    return byLayer;
  }

  accuracy(mask: MaskPairs): number {
    const masked = this.maskSets(mask);
    let correct = 0;
    for (let start = 0; start < this.tokenized.length; start += this.batchSize) {
      for (const example of this.tokenized.slice(start, start + this.batchSize)) {
        if (this.model.predict(example.ids, masked) === example.label) {
          correct += 1;
        }
      }
    }
    return (100 * correct) / this.tokenized.length;
  }
}
