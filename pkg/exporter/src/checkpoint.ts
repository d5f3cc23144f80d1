import * as fs from "fs";

/** A pretrained word-vector table: one fixed-width vector per token. */
export interface Checkpoint {
  dim: number;
  vocab: Map<string, Float64Array>;
}

/** Raised for problems that prevent the exporter from starting at all
 * (missing or unusable checkpoint), as opposed to bad input rows. */
export class SetupError extends Error {
  override name = "SetupError";
}

export function loadCheckpoint(path: string): Checkpoint {
  if (!fs.existsSync(path)) {
    throw new SetupError(`checkpoint not found: ${path}`);
  }
  let raw: unknown;
  try {
    raw = JSON.parse(fs.readFileSync(path, "utf-8"));
  } catch (err) {
    throw new SetupError(`checkpoint ${path} is not valid JSON: ${String(err)}`);
  }
  if (typeof raw !== "object" || raw === null) {
    throw new SetupError(`checkpoint ${path} must be a JSON object`);
  }
  const { dim, vocab } = raw as { dim?: unknown; vocab?: unknown };
  if (!Number.isInteger(dim) || (dim as number) < 1) {
    throw new SetupError(`checkpoint dim must be a positive integer, got ${dim}`);
  }
  if (typeof vocab !== "object" || vocab === null || Array.isArray(vocab)) {
    throw new SetupError("checkpoint vocab must be an object of token -> vector");
  }
  const table = new Map<string, Float64Array>();
  for (const [token, values] of Object.entries(vocab as Record<string, unknown>)) {
    if (!Array.isArray(values) || values.length !== dim) {
      throw new SetupError(
        `checkpoint vector for ${JSON.stringify(token)} must have ${dim} entries`,
      );
    }
    const vec = new Float64Array(dim as number);
    for (let i = 0; i < values.length; i++) {
      const v = values[i];
      if (typeof v !== "number" || !Number.isFinite(v)) {
        throw new SetupError(
          `checkpoint vector for ${JSON.stringify(token)} has a non-finite entry`,
        );
      }
      vec[i] = v;
    }
    table.set(token, vec);
  }
  if (table.size === 0) {
    throw new SetupError(`checkpoint ${path} has an empty vocabulary`);
  }
  return { dim: dim as number, vocab: table };
}
