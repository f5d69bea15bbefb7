/** Word-level tokenizer over the vocabulary frozen into the model file.
 * Sequences are [CLS] followed by word ids, truncated to the configured
 * length; unknown words map to [UNK]. */

export const CLS_TOKEN = "[CLS]";
export const UNK_TOKEN = "[UNK]";

export class Tokenizer {
  private readonly ids = new Map<string, number>();
  readonly clsId: number;
  readonly unkId: number;

  constructor(vocab: readonly string[]) {
    vocab.forEach((word, index) => this.ids.set(word, index));
    const cls = this.ids.get(CLS_TOKEN);
    const unk = this.ids.get(UNK_TOKEN);
    if (cls === undefined || unk === undefined) {
      throw new Error(`vocabulary must contain ${CLS_TOKEN} and ${UNK_TOKEN}`);
    }
    this.clsId = cls;
    this.unkId = unk;
  }

  get size(): number {
    return this.ids.size;
  }

  static normalize(text: string): string[] {
    return text
      .toLowerCase()
      .replace(/[^a-z0-9' ]+/g, " ")
      .split(/\s+/)
      .filter((word) => word.length > 0);
  }

  encode(text: string, maxLength: number): number[] {
    const tokens = [this.clsId];
    for (const word of Tokenizer.normalize(text)) {
      if (tokens.length >= maxLength) break;
      tokens.push(this.ids.get(word) ?? this.unkId);
    }
    return tokens;
  }
}
