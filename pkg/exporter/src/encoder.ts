import { Checkpoint } from "./checkpoint";

/** Lowercased word tokens; punctuation is a separator, apostrophes stay
 * inside words ("don't" -> ["don't"]). The checkpoint's vocabulary
 * decides which tokens actually contribute. */
export function tokenize(text: string): string[] {
  return text.toLowerCase().match(/[\p{L}\p{N}']+/gu) ?? [];
}

/** Mean-pooled word-vector sentence encoder.
 *
 * Out-of-vocabulary tokens are skipped; a sentence with no known token
 * encodes to the zero vector, which downstream consumers treat as
 * unrankable rather than an error. Optionally L2-normalizes non-zero
 * vectors so cosine comparisons reduce to dot products.
 */
export class MeanPoolEncoder {
  constructor(
    private readonly checkpoint: Checkpoint,
    private readonly normalize = false,
  ) {}

  get dim(): number {
    return this.checkpoint.dim;
  }

  encode(text: string): Float64Array {
    const out = new Float64Array(this.checkpoint.dim);
    let known = 0;
    for (const token of tokenize(text)) {
      const vec = this.checkpoint.vocab.get(token);
      if (vec === undefined) continue;
      known += 1;
      for (let i = 0; i < out.length; i++) out[i] = out[i]! + vec[i]!;
    }
    if (known === 0) return out;
    for (let i = 0; i < out.length; i++) out[i] = out[i]! / known;
    if (this.normalize) {
      let sq = 0;
      for (let i = 0; i < out.length; i++) sq += out[i]! * out[i]!;
      const norm = Math.sqrt(sq);
      if (norm > 0) {
        for (let i = 0; i < out.length; i++) out[i] = out[i]! / norm;
      }
    }
    return out;
  }

  encodeBatch(texts: string[]): Float64Array[] {
    return texts.map((text) => this.encode(text));
  }
}
